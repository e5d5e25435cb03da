use std::fmt;
use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::bernstein::parse_params;
use crate::error::{Error, Result};

/// Eigenvalues within `EIGEN_CLAMP` of `0`, relative to the largest, are
/// set to `0`; anything more negative is rejected.
pub const EIGEN_CLAMP: f64 = 1e-9;
const SYMMETRY_TOL: f64 = 1e-12;

/// Which finite operator a model carries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelKind {
    /// Second-difference Laplacian on `(Z/NZ)^d` with mesh `h`.
    Torus { d: usize, n: usize, h: f64 },
    /// Symmetric positive semi-definite matrix with unit weights.
    Matrix,
    /// Markov operator `A = −L` of a reversible generator `L`.
    Markov,
}

#[derive(Clone)]
enum Basis {
    Fourier {
        d: usize,
        n: usize,
        forward: Arc<dyn Fft<f64>>,
        inverse: Arc<dyn Fft<f64>>,
    },
    /// Columns `U` of the eigenvectors of `W^{1/2} A W^{−1/2}`.
    Dense { u: DMatrix<f64>, sqrt_w: DVector<f64> },
}

/// Spectral coefficients of a function, in the model's own basis.
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficients {
    Fourier(Vec<Complex<f64>>),
    Dense(Vec<f64>),
}

/// A non-negative self-adjoint operator `A` on `L²(X, w)` for a finite set
/// `X` with point weights `w`, together with its eigenstructure.
#[derive(Clone)]
pub struct SpectralModel {
    kind: ModelKind,
    label: String,
    weights: Vec<f64>,
    eigenvalues: Vec<f64>,
    basis: Basis,
}

impl fmt::Debug for SpectralModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralModel")
            .field("label", &self.label)
            .field("kind", &self.kind)
            .field("points", &self.weights.len())
            .finish()
    }
}

/// `σ(k) = Σ_j (2/h²)(1 − cos(2π k_j / N))` in row-major index order.
fn torus_symbol(d: usize, n: usize, h: f64) -> Vec<f64> {
    let axis: Vec<f64> = (0..n)
        .map(|k| 2.0 / (h * h) * (1.0 - (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos()))
        .collect();
    let total = n.pow(d as u32);
    (0..total)
        .map(|mut idx| {
            let mut s = 0.0;
            for _ in 0..d {
                s += axis[idx % n];
                idx /= n;
            }
            s
        })
        .collect()
}

fn check_symmetric(m: &DMatrix<f64>, what: &str) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Model(format!(
            "{what} is {}×{}, not square",
            m.nrows(),
            m.ncols()
        )));
    }
    let scale = m.amax().max(1.0);
    let asym = (m - m.transpose()).amax();
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::Model(format!(
            "{what} is not symmetric (max asymmetry {asym:e})"
        )));
    }
    Ok(())
}

impl SpectralModel {
    /// Torus `(Z/NZ)^d` with mesh `h` and point weight `h^d`.
    pub fn torus(d: usize, n: usize, h: Option<f64>) -> Result<Self> {
        if d == 0 || n < 2 {
            return Err(Error::Model(format!("torus needs d ≥ 1 and N ≥ 2, got d={d}, N={n}")));
        }
        let h = h.unwrap_or(1.0 / n as f64);
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Model(format!("mesh h = {h} must be positive")));
        }
        let total = n
            .checked_pow(d as u32)
            .filter(|&t| t <= 1 << 22)
            .ok_or_else(|| Error::Model(format!("torus {n}^{d} is too large")))?;
        let mut planner = FftPlanner::new();
        let label = format!("torus:{d},{n},{h}");
        Ok(Self {
            kind: ModelKind::Torus { d, n, h },
            label,
            weights: vec![h.powi(d as i32); total],
            eigenvalues: torus_symbol(d, n, h),
            basis: Basis::Fourier {
                d,
                n,
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            },
        })
    }

    /// Dense operator `A` on `L²(w)`; `W A` must be symmetric.
    fn dense(kind: ModelKind, label: String, a: DMatrix<f64>, weights: Vec<f64>) -> Result<Self> {
        let n = a.nrows();
        if n == 0 || weights.len() != n {
            return Err(Error::Model(format!("{n}×{n} operator with {} weights", weights.len())));
        }
        if weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::Model("weights must be positive".into()));
        }
        let w = DMatrix::from_diagonal(&DVector::from_vec(weights.clone()));
        check_symmetric(&(&w * &a), "weighted operator W·A")?;
        let sqrt_w = DVector::from_iterator(n, weights.iter().map(|w| w.sqrt()));
        let mut b = a.clone();
        for i in 0..n {
            for j in 0..n {
                b[(i, j)] *= sqrt_w[i] / sqrt_w[j];
            }
        }
        let b = 0.5 * (&b + b.transpose());
        let eig = SymmetricEigen::new(b);
        let scale = eig.eigenvalues.amax().max(1.0);
        let mut eigenvalues = Vec::with_capacity(n);
        for &l in eig.eigenvalues.iter() {
            if l < -EIGEN_CLAMP * scale {
                return Err(Error::Model(format!("negative eigenvalue {l:e}")));
            }
            eigenvalues.push(if l.abs() <= EIGEN_CLAMP * scale { 0.0 } else { l });
        }
        Ok(Self {
            kind,
            label,
            weights,
            eigenvalues,
            basis: Basis::Dense {
                u: eig.eigenvectors,
                sqrt_w,
            },
        })
    }

    /// Symmetric positive semi-definite `S` with unit weights.
    pub fn matrix(s: DMatrix<f64>) -> Result<Self> {
        let n = s.nrows();
        Self::dense(ModelKind::Matrix, format!("matrix:{n}"), s, vec![1.0; n])
    }

    /// `A` with explicit weights; `W A` symmetric positive semi-definite.
    pub fn weighted_matrix(a: DMatrix<f64>, weights: Vec<f64>) -> Result<Self> {
        let n = a.nrows();
        Self::dense(ModelKind::Matrix, format!("matrix:{n}"), a, weights)
    }

    /// Finite Markov chain. `q` may be given either as the generator `L`
    /// (off-diagonals ≥ 0) or as `A = −L` (off-diagonals ≤ 0); rows must sum
    /// to `0`, `weights` must be a probability vector and `π_i L_ij` symmetric.
    pub fn markov(q: DMatrix<f64>, weights: Option<Vec<f64>>) -> Result<Self> {
        let n = q.nrows();
        if !q.is_square() || n == 0 {
            return Err(Error::Model("markov matrix must be square and non-empty".into()));
        }
        let weights = weights.unwrap_or_else(|| vec![1.0 / n as f64; n]);
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Model(format!("markov weights sum to {total}, not 1")));
        }
        let scale = q.amax().max(1.0);
        for i in 0..n {
            let row: f64 = q.row(i).iter().sum();
            if row.abs() > 1e-12 * scale {
                return Err(Error::Model(format!("row {i} sums to {row:e}, not 0")));
            }
        }
        let off = |sign: f64| (0..n).all(|i| (0..n).all(|j| i == j || sign * q[(i, j)] >= 0.0));
        let a = if off(-1.0) {
            q
        } else if off(1.0) {
            -q
        } else {
            return Err(Error::Model("off-diagonal entries must share one sign".into()));
        };
        Self::dense(ModelKind::Markov, format!("markov:{n}"), a, weights)
    }

    /// `torus:d,N[,h]`, `matrix:<path>` or `markov:<path>`.
    pub fn from_spec(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (kind, rest) = spec.split_once(':').ok_or_else(|| Error::Parse {
            spec: spec.to_string(),
            reason: "expected `torus:d,N[,h]`, `matrix:<file>` or `markov:<file>`".into(),
        })?;
        let mut model = match kind {
            "torus" => {
                let p = parse_params(spec, rest)?;
                let int = |v: f64| {
                    if v >= 1.0 && v.fract() == 0.0 {
                        Ok(v as usize)
                    } else {
                        Err(Error::Parse {
                            spec: spec.to_string(),
                            reason: format!("{v} is not a positive integer"),
                        })
                    }
                };
                match p.as_slice() {
                    [d, n] => Self::torus(int(*d)?, int(*n)?, None)?,
                    [d, n, h] => Self::torus(int(*d)?, int(*n)?, Some(*h))?,
                    _ => {
                        return Err(Error::Parse {
                            spec: spec.to_string(),
                            reason: "torus takes d,N[,h]".into(),
                        })
                    }
                }
            }
            "matrix" | "markov" => {
                let (m, w) = read_matrix_file(Path::new(rest))?;
                if kind == "matrix" {
                    match w {
                        Some(w) => Self::weighted_matrix(m, w)?,
                        None => Self::matrix(m)?,
                    }
                } else {
                    Self::markov(m, w)?
                }
            }
            other => {
                return Err(Error::Parse {
                    spec: spec.to_string(),
                    reason: format!("unknown model kind `{other}`"),
                })
            }
        };
        model.label = spec.to_string();
        Ok(model)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Eigenvalues in the order of [`coefficients`](Self::coefficients).
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Number of eigenvalues equal to zero after clamping.
    pub fn kernel_dimension(&self) -> usize {
        self.eigenvalues.iter().filter(|&&l| l == 0.0).count()
    }

    /// Smallest non-zero eigenvalue.
    pub fn spectral_gap(&self) -> Option<f64> {
        self.eigenvalues.iter().copied().filter(|&l| l > 0.0).reduce(f64::min)
    }

    pub fn l1(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.weights).map(|(v, w)| w * v.abs()).sum()
    }

    pub fn l2(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.weights).map(|(v, w)| w * v * v).sum::<f64>().sqrt()
    }

    /// `⟨f, h⟩ = Σ w f h`.
    pub fn inner(&self, f: &[f64], h: &[f64]) -> f64 {
        f.iter().zip(h).zip(&self.weights).map(|((a, b), w)| w * a * b).sum()
    }

    /// `μ(f) = Σ w f / Σ w`.
    pub fn mean(&self, f: &[f64]) -> f64 {
        self.inner(f, &vec![1.0; f.len()]) / self.total_measure()
    }

    fn check_len(&self, f: &[f64]) -> Result<()> {
        if f.len() == self.len() {
            Ok(())
        } else {
            Err(Error::Model(format!(
                "function has {} values, model has {} points",
                f.len(),
                self.len()
            )))
        }
    }

    pub fn coefficients(&self, f: &[f64]) -> Result<Coefficients> {
        self.check_len(f)?;
        Ok(match &self.basis {
            Basis::Fourier { d, n, forward, .. } => {
                let mut data: Vec<Complex<f64>> = f.iter().map(|&v| Complex::new(v, 0.0)).collect();
                fft_nd(&mut data, *d, *n, forward.as_ref());
                Coefficients::Fourier(data)
            }
            Basis::Dense { u, sqrt_w } => {
                let g = DVector::from_iterator(f.len(), f.iter().zip(sqrt_w.iter()).map(|(v, s)| v * s));
                Coefficients::Dense((u.transpose() * g).iter().copied().collect())
            }
        })
    }

    /// Inverse of [`coefficients`](Self::coefficients).
    pub fn synthesize(&self, c: Coefficients) -> Result<Vec<f64>> {
        match (&self.basis, c) {
            (Basis::Fourier { d, n, inverse, .. }, Coefficients::Fourier(mut data)) => {
                fft_nd(&mut data, *d, *n, inverse.as_ref());
                let scale = 1.0 / data.len() as f64;
                Ok(data.iter().map(|z| z.re * scale).collect())
            }
            (Basis::Dense { u, sqrt_w }, Coefficients::Dense(c)) => {
                let v = u * DVector::from_vec(c);
                Ok(v.iter().zip(sqrt_w.iter()).map(|(a, s)| a / s).collect())
            }
            _ => Err(Error::Model("coefficients do not belong to this model".into())),
        }
    }

    /// Energy `p_i ≥ 0` of `f` in each eigenspace; `Σ p_i = ‖f‖₂²`.
    pub fn power_spectrum(&self, f: &[f64]) -> Result<Vec<f64>> {
        Ok(match self.coefficients(f)? {
            Coefficients::Fourier(c) => {
                let scale = self.weights[0] / c.len() as f64;
                c.iter().map(|z| scale * z.norm_sqr()).collect()
            }
            Coefficients::Dense(c) => c.iter().map(|v| v * v).collect(),
        })
    }

    /// `φ(A) f`; fails when `φ` is not finite on an eigenvalue carrying energy.
    pub fn apply<F: Fn(f64) -> f64>(&self, phi: F, f: &[f64]) -> Result<Vec<f64>> {
        let c = self.coefficients(f)?;
        let factors = self.spectral_factors(&phi, &c)?;
        let c = match c {
            Coefficients::Fourier(v) => Coefficients::Fourier(v.iter().zip(&factors).map(|(z, m)| z * *m).collect()),
            Coefficients::Dense(v) => Coefficients::Dense(v.iter().zip(&factors).map(|(z, m)| z * m).collect()),
        };
        self.synthesize(c)
    }

    fn spectral_factors<F: Fn(f64) -> f64>(&self, phi: &F, c: &Coefficients) -> Result<Vec<f64>> {
        let energy: Vec<f64> = match c {
            Coefficients::Fourier(v) => v.iter().map(|z| z.norm_sqr()).collect(),
            Coefficients::Dense(v) => v.iter().map(|z| z * z).collect(),
        };
        let total: f64 = energy.iter().sum();
        self.eigenvalues
            .iter()
            .zip(&energy)
            .map(|(&l, &e)| {
                let v = phi(l);
                if v.is_finite() {
                    Ok(v)
                } else if e <= 1e-28 * total {
                    Ok(0.0)
                } else {
                    Err(Error::InfiniteOnSpectrum(l))
                }
            })
            .collect()
    }

    /// `(φ(A) f, f) = Σ φ(λ_i) p_i`.
    pub fn quadratic_form<F: Fn(f64) -> f64>(&self, phi: F, f: &[f64]) -> Result<f64> {
        let p = self.power_spectrum(f)?;
        let total: f64 = p.iter().sum();
        let mut q = 0.0;
        for (&l, &e) in self.eigenvalues.iter().zip(&p) {
            if e <= 1e-28 * total {
                continue;
            }
            let v = phi(l);
            if !v.is_finite() {
                return Err(Error::InfiniteOnSpectrum(l));
            }
            q += v * e;
        }
        Ok(q)
    }

    /// Dense matrix of `φ(A)` (column `j` is `φ(A) δ_j`).
    pub fn operator_matrix<F: Fn(f64) -> f64>(&self, phi: F) -> Result<DMatrix<f64>> {
        let n = self.len();
        if let Basis::Dense { u, sqrt_w } = &self.basis {
            let mut diag = DMatrix::zeros(n, n);
            for (i, &l) in self.eigenvalues.iter().enumerate() {
                let v = phi(l);
                if !v.is_finite() {
                    return Err(Error::InfiniteOnSpectrum(l));
                }
                diag[(i, i)] = v;
            }
            let mut m = u * diag * u.transpose();
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] *= sqrt_w[j] / sqrt_w[i];
                }
            }
            return Ok(m);
        }
        let mut m = DMatrix::zeros(n, n);
        let mut delta = vec![0.0; n];
        for j in 0..n {
            delta[j] = 1.0;
            let col = self.apply(&phi, &delta)?;
            for (i, v) in col.into_iter().enumerate() {
                m[(i, j)] = v;
            }
            delta[j] = 0.0;
        }
        Ok(m)
    }
}

fn fft_nd(data: &mut [Complex<f64>], d: usize, n: usize, plan: &dyn Fft<f64>) {
    if d == 1 {
        plan.process(data);
        return;
    }
    let mut line = vec![Complex::new(0.0, 0.0); n];
    let total = data.len();
    let mut stride = 1;
    for _ in 0..d {
        let block = stride * n;
        for start in (0..total).step_by(block) {
            for offset in 0..stride {
                let base = start + offset;
                for (k, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + k * stride];
                }
                plan.process(&mut line);
                for (k, v) in line.iter().enumerate() {
                    data[base + k * stride] = *v;
                }
            }
        }
        stride *= n;
    }
}

/// Reads a whitespace-separated square array. Lines starting with `#` are
/// comments; a line `weights w_1 … w_n` supplies the point weights.
pub fn read_matrix_file(path: &Path) -> Result<(DMatrix<f64>, Option<Vec<f64>>)> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Model(format!("cannot read `{}`: {e}", path.display())))?;
    parse_matrix_text(&text)
}

pub fn parse_matrix_text(text: &str) -> Result<(DMatrix<f64>, Option<Vec<f64>>)> {
    let parse_row = |line: &str| -> Result<Vec<f64>> {
        line.split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|e| Error::Model(format!("bad number `{t}`: {e}")))
            })
            .collect()
    };
    let mut rows = Vec::new();
    let mut weights = None;
    for line in text.lines().map(str::trim) {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("weights") {
            weights = Some(parse_row(rest)?);
            continue;
        }
        rows.push(parse_row(line)?);
    }
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Model(format!("expected a square array, got {n} rows")));
    }
    Ok((DMatrix::from_fn(n, n, |i, j| rows[i][j]), weights))
}
