use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::model::{ModelKind, SpectralModel};
use super::samples::TestFunction;
use crate::bernstein::BernsteinFunction;
use crate::error::{Error, Result};
use crate::legendre::{NashFunction, RateFunction, RealFn};

/// Margins below this (after normalising to `‖f‖₂ = 1`) are violations.
pub const MARGIN_TOL: f64 = -1e-9;

/// A function `φ` of the operator, with an id for reports.
#[derive(Clone)]
pub struct Phi {
    id: String,
    f: RealFn,
}

impl fmt::Debug for Phi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Phi({})", self.id)
    }
}

impl Phi {
    pub fn new<F>(id: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            id: id.into(),
            f: Arc::new(f),
        }
    }

    pub fn identity() -> Self {
        Self::new("identity", |l| l)
    }

    /// `g ∘ λ`, i.e. the operator `g(A)`.
    pub fn bernstein(g: &BernsteinFunction) -> Self {
        let g2 = g.clone();
        Self::new(g.name(), move |l| if l == 0.0 { g2.g0() } else { g2.eval(l) })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn eval(&self, l: f64) -> f64 {
        (self.f)(l)
    }
}

/// Outcome of an inequality sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub model: String,
    pub phi_id: String,
    pub rate_id: String,
    pub n_checked: usize,
    pub n_violations: usize,
    pub worst_margin: Option<f64>,
    pub worst_input_hash: Option<String>,
}

impl Report {
    fn empty(model: &SpectralModel, phi_id: &str, rate_id: &str) -> Self {
        Self {
            model: model.label().to_string(),
            phi_id: phi_id.to_string(),
            rate_id: rate_id.to_string(),
            n_checked: 0,
            n_violations: 0,
            worst_margin: None,
            worst_input_hash: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.n_violations == 0
    }

    /// Combines two sweeps over the same model.
    pub fn merge(mut self, other: Report) -> Report {
        self.n_checked += other.n_checked;
        self.n_violations += other.n_violations;
        let replace = match (self.worst_margin, other.worst_margin) {
            (None, Some(_)) => true,
            (Some(a), Some(b)) => b < a,
            _ => false,
        };
        if replace {
            self.worst_margin = other.worst_margin;
            self.worst_input_hash = other.worst_input_hash;
        }
        self
    }
}

struct Prepared {
    spectrum: Vec<f64>,
    l1sq: f64,
    l2sq: f64,
}

/// Test functions with their power spectra in one model, computed once.
pub struct SampleSet {
    samples: Vec<TestFunction>,
    prepared: Vec<Prepared>,
    model_label: String,
}

impl SampleSet {
    pub fn new(model: &SpectralModel, samples: Vec<TestFunction>) -> Result<Self> {
        let prepared = samples
            .par_iter()
            .map(|f| {
                Ok(Prepared {
                    spectrum: model.power_spectrum(&f.values)?,
                    l1sq: f.l1 * f.l1,
                    l2sq: f.l2 * f.l2,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            samples,
            prepared,
            model_label: model.label().to_string(),
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[TestFunction] {
        &self.samples
    }

    fn check_model(&self, model: &SpectralModel) -> Result<()> {
        if self.model_label == model.label() {
            Ok(())
        } else {
            Err(Error::Model(format!(
                "samples were prepared for `{}`, not `{}`",
                self.model_label,
                model.label()
            )))
        }
    }
}

/// `a · b` with `0 · ∞ = 0`.
fn mul0(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        a * b
    }
}

/// `Σ factor_i p_i`, skipping empty eigenspaces.
fn weighted(factors: &[f64], p: &[f64]) -> f64 {
    factors.iter().zip(p).map(|(&a, &b)| mul0(b, a)).sum()
}

/// Runs `margins` on every non-zero sample and folds the results in sample
/// order, so the report does not depend on scheduling.
fn sweep<F>(model: &SpectralModel, phi_id: &str, rate_id: &str, set: &SampleSet, margins: F) -> Report
where
    F: Fn(&Prepared) -> Vec<f64> + Sync,
{
    let per_sample: Vec<Option<(usize, usize, f64)>> = set
        .prepared
        .par_iter()
        .map(|p| {
            if p.l2sq == 0.0 {
                return None;
            }
            let m = margins(p);
            let worst = m.iter().copied().fold(f64::INFINITY, f64::min);
            let bad = m.iter().filter(|&&v| !(v >= MARGIN_TOL)).count();
            Some((m.len(), bad, worst))
        })
        .collect();
    let mut report = Report::empty(model, phi_id, rate_id);
    let mut worst: Option<(f64, usize)> = None;
    for (i, r) in per_sample.into_iter().enumerate() {
        let Some((n, bad, w)) = r else { continue };
        report.n_checked += n;
        report.n_violations += bad;
        if n > 0 && worst.is_none_or(|(v, _)| w < v || (v.is_nan() && !w.is_nan())) {
            worst = Some((w, i));
        }
    }
    if let Some((w, i)) = worst {
        report.worst_margin = Some(w);
        report.worst_input_hash = Some(set.samples[i].hash());
    }
    report
}

fn phi_values(model: &SpectralModel, phi: &Phi) -> Vec<f64> {
    model.eigenvalues().iter().map(|&l| phi.eval(l)).collect()
}

/// `r (φ(A)f, f) + β(r) ‖f‖₁² − ‖f‖₂² ≥ 0` over `r_grid × samples`.
pub fn check_super_poincare(
    model: &SpectralModel,
    phi: &Phi,
    beta: &RateFunction,
    r_grid: &[f64],
    samples: &SampleSet,
) -> Result<Report> {
    samples.check_model(model)?;
    let phis = phi_values(model, phi);
    let betas: Vec<f64> = r_grid.iter().map(|&r| beta.eval(r)).collect();
    Ok(sweep(model, phi.id(), beta.label(), samples, |p| {
        let q = weighted(&phis, &p.spectrum);
        r_grid
            .iter()
            .zip(&betas)
            .map(|(&r, &b)| (mul0(r, q) + mul0(p.l1sq, b) - p.l2sq) / p.l2sq)
            .collect()
    }))
}

/// `‖f‖₂² D(‖f‖₂²) ≤ (φ(A)f, f)` for `f` rescaled to `‖f‖₁ = 1`.
pub fn check_nash(model: &SpectralModel, phi: &Phi, d: &NashFunction, samples: &SampleSet) -> Result<Report> {
    samples.check_model(model)?;
    let phis = phi_values(model, phi);
    Ok(sweep(model, phi.id(), d.label(), samples, |p| {
        let q = weighted(&phis, &p.spectrum);
        let y = p.l2sq / p.l1sq;
        vec![q / p.l2sq - d.eval(y)]
    }))
}

/// `‖T_t f‖₂² ≤ e^{−2t/r} ‖f‖₂² + (1 − e^{−2t/r}) β(r) ‖f‖₁²` with
/// `T_t = e^{−t φ(A)}`, over `r_grid × t_grid × samples`.
pub fn check_decay(
    model: &SpectralModel,
    phi: &Phi,
    beta: &RateFunction,
    r_grid: &[f64],
    t_grid: &[f64],
    samples: &SampleSet,
) -> Result<Report> {
    samples.check_model(model)?;
    let phis = phi_values(model, phi);
    let decay: Vec<Vec<f64>> = t_grid
        .iter()
        .map(|&t| phis.iter().map(|&v| (-2.0 * t * v).exp()).collect())
        .collect();
    let betas: Vec<f64> = r_grid.iter().map(|&r| beta.eval(r)).collect();
    Ok(sweep(model, phi.id(), beta.label(), samples, |p| {
        let mut out = Vec::with_capacity(r_grid.len() * t_grid.len());
        for (t, factors) in t_grid.iter().zip(&decay) {
            let lhs = weighted(factors, &p.spectrum);
            for (&r, &b) in r_grid.iter().zip(&betas) {
                let keep = (-2.0 * t / r).exp();
                let gain = -(-2.0 * t / r).exp_m1();
                let rhs = keep * p.l2sq + mul0(gain, mul0(p.l1sq, b));
                out.push((rhs - lhs) / p.l2sq);
            }
        }
        out
    }))
}

/// `r ((I − T_t) f, f) + β(t / ln(1 + 1/(r−1))) ‖f‖₁² − ‖f‖₂² ≥ 0`, `r > 1`.
pub fn check_elementary(
    model: &SpectralModel,
    phi: &Phi,
    beta: &RateFunction,
    t: f64,
    r_grid: &[f64],
    samples: &SampleSet,
) -> Result<Report> {
    samples.check_model(model)?;
    if let Some(&r) = r_grid.iter().find(|&&r| !(r > 1.0)) {
        return Err(Error::Domain {
            value: r,
            lo: 1.0,
            hi: f64::INFINITY,
        });
    }
    if !(t > 0.0) {
        return Err(Error::ParameterOutOfRange(format!("t = {t} must be positive")));
    }
    let factors: Vec<f64> = phi_values(model, phi).iter().map(|&v| -(-t * v).exp_m1()).collect();
    let betas: Vec<f64> = r_grid
        .iter()
        .map(|&r| beta.eval(t / (1.0 / (r - 1.0)).ln_1p()))
        .collect();
    Ok(sweep(model, phi.id(), beta.label(), samples, |p| {
        let q = weighted(&factors, &p.spectrum);
        r_grid
            .iter()
            .zip(&betas)
            .map(|(&r, &b)| (r * q + mul0(p.l1sq, b) - p.l2sq) / p.l2sq)
            .collect()
    }))
}

/// Spectral-gap decay sweep together with the gap that was used.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapReport {
    pub report: Report,
    pub gap: f64,
    /// The kernel is larger than the constants; the bound used `λ = 0`.
    pub degenerate: bool,
}

/// `‖T^g_t f − μ(f)‖₂ ≤ e^{−t g(λ)} ‖f − μ(f)‖₂` with `λ` the spectral gap,
/// computed by applying `e^{−t g(A)}` directly.
pub fn check_gap_decay(
    model: &SpectralModel,
    g: &BernsteinFunction,
    samples: &[TestFunction],
    t_grid: &[f64],
) -> Result<GapReport> {
    if !matches!(model.kind(), ModelKind::Markov | ModelKind::Torus { .. }) {
        return Err(Error::Model("gap decay needs a Markov or torus model".into()));
    }
    if g.g0() != 0.0 {
        return Err(Error::Precondition(format!("`{}` has g(0) = {} ≠ 0", g.name(), g.g0())));
    }
    let degenerate = model.kernel_dimension() != 1;
    let gap = if degenerate {
        0.0
    } else {
        model.spectral_gap().unwrap_or(0.0)
    };
    let rate = if gap > 0.0 { g.eval(gap) } else { 0.0 };
    let phi = Phi::bernstein(g);
    let per_sample = samples
        .par_iter()
        .map(|f| {
            let mu = model.mean(&f.values);
            let centred: Vec<f64> = f.values.iter().map(|v| v - mu).collect();
            let c = model.l2(&centred);
            let mut margins = Vec::with_capacity(t_grid.len());
            for &t in t_grid {
                let tf = model.apply(|l| (-t * phi.eval(l)).exp(), &f.values)?;
                let dev: Vec<f64> = tf.iter().map(|v| v - mu).collect();
                margins.push(((-t * rate).exp() * c - model.l2(&dev)) / f.l2.max(f64::MIN_POSITIVE));
            }
            Ok(margins)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = Report::empty(model, &phi.id, &format!("gap:{gap}"));
    let mut worst: Option<(f64, usize)> = None;
    for (i, m) in per_sample.iter().enumerate() {
        if samples[i].l2 == 0.0 {
            continue;
        }
        report.n_checked += m.len();
        report.n_violations += m.iter().filter(|&&v| !(v >= MARGIN_TOL)).count();
        for &v in m {
            if worst.is_none_or(|(w, _)| v < w) {
                worst = Some((v, i));
            }
        }
    }
    if let Some((w, i)) = worst {
        report.worst_margin = Some(w);
        report.worst_input_hash = Some(samples[i].hash());
    }
    Ok(GapReport {
        report,
        gap,
        degenerate,
    })
}
