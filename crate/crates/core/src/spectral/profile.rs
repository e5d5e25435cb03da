use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use super::checks::Phi;
use super::model::{ModelKind, SpectralModel};
use crate::error::{Error, Result};
use crate::legendre::RateFunction;

/// Sorted values `φ(σ_k)` and the counting constant `1/(Nh)^d` of a torus.
fn torus_counts(model: &SpectralModel, phi: &dyn Fn(f64) -> f64) -> Result<(Vec<f64>, f64)> {
    let ModelKind::Torus { .. } = model.kind() else {
        return Err(Error::Model("the Fourier rate is defined on torus models".into()));
    };
    let mut values: Vec<f64> = model.eigenvalues().iter().map(|&l| phi(l)).collect();
    values.sort_by(f64::total_cmp);
    Ok((values, 1.0 / model.total_measure()))
}

/// `#{k : φ(σ_k) < 1/t} / (Nh)^d`.
///
/// Each Fourier coefficient obeys `p_k ≤ ‖f‖₁² / (Nh)^d`, so splitting the
/// spectrum at `φ = 1/t` gives a valid super-Poincaré rate for `φ(Δ)`.
pub fn fourier_rate(model: &SpectralModel, phi: &dyn Fn(f64) -> f64, t: f64) -> Result<f64> {
    let (values, norm) = torus_counts(model, phi)?;
    Ok(norm * values.partition_point(|&v| v < 1.0 / t) as f64)
}

/// [`fourier_rate`] as a rate function on `(0, ∞)`.
pub fn fourier_rate_function(model: &SpectralModel, phi: &Phi) -> Result<RateFunction> {
    let f = phi.clone();
    let (values, norm) = torus_counts(model, &move |l| f.eval(l))?;
    Ok(RateFunction::new(
        format!("fourier({},{})", model.label(), phi.id()),
        0.0,
        f64::INFINITY,
        move |t: f64| norm * values.partition_point(|&v| v < 1.0 / t) as f64,
    ))
}

/// A lower bound on `sup{‖f‖₂² − r (φ(A)f, f) : ‖f‖₁ ≤ 1}` and the function
/// attaining it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileEstimate {
    pub r: f64,
    pub lower_bound: f64,
    pub argmax: Vec<f64>,
}

/// Euclidean projection onto `{x : Σ|x_i| ≤ 1}`.
fn project_l1_ball(v: &mut DVector<f64>) {
    let l1: f64 = v.iter().map(|x| x.abs()).sum();
    if l1 <= 1.0 {
        return;
    }
    let mut u: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cum += uj;
        let cand = (cum - 1.0) / (j + 1) as f64;
        if uj > cand {
            theta = cand;
        }
    }
    for x in v.iter_mut() {
        *x = x.signum() * (x.abs() - theta).max(0.0);
    }
}

/// Multi-start projected gradient ascent in the variable `u = W f`, in which
/// the constraint is the unit `ℓ¹` ball and the objective is `uᵀ M u` with
/// `M = W⁻¹ − r φ(A) W⁻¹`. Point masses and the normalised constant are
/// always among the candidates.
pub fn estimate_profile(
    model: &SpectralModel,
    phi: &Phi,
    r: f64,
    n_starts: usize,
    seed: u64,
) -> Result<ProfileEstimate> {
    if !(r > 0.0) {
        return Err(Error::ParameterOutOfRange(format!("r = {r} must be positive")));
    }
    let n = model.len();
    let w = model.weights();
    let op = model.operator_matrix(|l| phi.eval(l))?;
    let mut m = DMatrix::from_fn(n, n, |i, j| -r * op[(i, j)] / w[j]);
    for i in 0..n {
        m[(i, i)] += 1.0 / w[i];
    }
    let m = 0.5 * (&m + m.transpose());
    let objective = |u: &DVector<f64>| u.dot(&(&m * u));
    let lip = (0..n)
        .map(|i| m.row(i).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let step = if lip > 0.0 { 0.5 / lip } else { 1.0 };

    let mut best = (f64::NEG_INFINITY, DVector::zeros(n));
    let consider = |u: DVector<f64>, best: &mut (f64, DVector<f64>)| {
        let v = objective(&u);
        if v > best.0 {
            *best = (v, u);
        }
    };
    for i in 0..n {
        let mut e = DVector::zeros(n);
        e[i] = 1.0;
        consider(e, &mut best);
    }
    let total: f64 = w.iter().sum();
    consider(DVector::from_iterator(n, w.iter().map(|x| x / total)), &mut best);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut starts: Vec<DVector<f64>> = vec![best.1.clone()];
    for _ in 0..n_starts {
        let v: DVector<f64> = DVector::from_iterator(n, (0..n).map(|_| normal.sample(&mut rng)));
        let l1: f64 = v.iter().map(|x| x.abs()).sum();
        starts.push(v / l1);
    }
    for mut u in starts {
        let mut value = objective(&u);
        for _ in 0..2000 {
            let mut next = &u + (&m * &u) * (2.0 * step);
            project_l1_ball(&mut next);
            let nv = objective(&next);
            let moved = (&next - &u).amax();
            u = next;
            let done = nv - value <= 1e-15 * value.abs().max(1e-300) && moved < 1e-13;
            value = nv;
            if done {
                break;
            }
        }
        consider(u, &mut best);
    }
    let (value, u) = best;
    Ok(ProfileEstimate {
        r,
        lower_bound: value,
        argmax: u.iter().zip(w).map(|(a, b)| a / b).collect(),
    })
}
