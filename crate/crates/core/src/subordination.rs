//! Transition measures `ν_t^g` of subordinators and the subordinated
//! semigroup `T^g_t = ∫ T_s dν_t^g(s)`.
//!
//! Only two measures are exact: the Poisson comb of `1 − e^{−λx}` and the
//! one-sided stable law of `√x`. Other exponents are reachable through the
//! Gaver–Stehfest reconstruction, which is diagnostic only and is refused by
//! [`subordinate_semigroup`].

use std::f64::consts::{LN_2, PI};

use serde::Serialize;

use crate::bernstein::BernsteinFunction;
use crate::error::{Error, Result};
use crate::quad::{self, Tail, Tolerance};
use crate::spectral::{Phi, SpectralModel, TestFunction};

/// Poisson atoms are generated until this much mass is covered.
pub const POISSON_MASS: f64 = 1.0 - 1e-14;

/// The stable-half `w`-integral is cut at `w = 7`, dropping `erfc(7) ≈ 4e−23`.
const STABLE_W_MAX: f64 = 7.0;

/// Gaver–Stehfest order.
pub const STEHFEST_N: usize = 16;

/// Reconstructions losing more digits than this to cancellation are flagged.
pub const STEHFEST_MAX_DIGITS_LOST: f64 = 8.0;

#[derive(Debug, Clone)]
pub enum SubordinatorMeasure {
    /// Atoms `e^{−t} t^k / k!` at `kλ`, for `g(x) = 1 − e^{−λx}`.
    Poisson {
        lambda: f64,
        t: f64,
        atoms: Vec<(f64, f64)>,
    },
    /// Density `t/(2√π) s^{−3/2} e^{−t²/(4s)}`, for `g(x) = √x`.
    StableHalf { t: f64 },
    /// Gaver–Stehfest reconstruction of the density of `ν_t^g`.
    Numeric { g: BernsteinFunction, t: f64 },
}

pub fn poisson_measure(lambda: f64, t: f64) -> Result<SubordinatorMeasure> {
    if !(lambda > 0.0 && lambda.is_finite() && t > 0.0 && t.is_finite()) {
        return Err(Error::ParameterOutOfRange(format!(
            "Poisson measure needs λ, t > 0, got λ = {lambda}, t = {t}"
        )));
    }
    let mut atoms = Vec::new();
    let mut ln_fact = 0.0;
    let mut mass = 0.0;
    let max_k = (t + 40.0 * t.sqrt() + 100.0) as usize;
    for k in 0..=max_k {
        if k > 0 {
            ln_fact += (k as f64).ln();
        }
        let w = (-t + k as f64 * t.ln() - ln_fact).exp();
        atoms.push((k as f64 * lambda, w));
        mass += w;
        if mass >= POISSON_MASS {
            break;
        }
    }
    Ok(SubordinatorMeasure::Poisson { lambda, t, atoms })
}

pub fn stable_half_measure(t: f64) -> Result<SubordinatorMeasure> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::ParameterOutOfRange(format!(
            "stable-half measure needs t > 0, got {t}"
        )));
    }
    Ok(SubordinatorMeasure::StableHalf { t })
}

pub fn numeric_measure(g: &BernsteinFunction, t: f64) -> Result<SubordinatorMeasure> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::ParameterOutOfRange(format!(
            "numeric measure needs t > 0, got {t}"
        )));
    }
    Ok(SubordinatorMeasure::Numeric { g: g.clone(), t })
}

fn stable_half_density(t: f64, s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    t / (2.0 * PI.sqrt()) * s.powf(-1.5) * (-t * t / (4.0 * s)).exp()
}

fn tight() -> Tolerance {
    Tolerance {
        abs: 1e-300,
        rel: 1e-13,
        max_intervals: 4000,
    }
}

impl SubordinatorMeasure {
    pub fn time(&self) -> f64 {
        match self {
            Self::Poisson { t, .. } | Self::StableHalf { t } | Self::Numeric { t, .. } => *t,
        }
    }

    /// The Laplace exponent `g` with `∫ e^{−sx} dν(s) = e^{−t g(x)}`.
    pub fn exponent(&self) -> BernsteinFunction {
        match self {
            Self::Poisson { lambda, .. } => format!("elementary:{lambda}").parse().expect("valid id"),
            Self::StableHalf { .. } => "power:0.5".parse().expect("valid id"),
            Self::Numeric { g, .. } => g.clone(),
        }
    }

    pub fn kind_id(&self) -> &'static str {
        match self {
            Self::Poisson { .. } => "poisson",
            Self::StableHalf { .. } => "stable_half",
            Self::Numeric { .. } => "numeric",
        }
    }

    /// Density at `s`; `None` for atomic measures.
    pub fn density(&self, s: f64) -> Option<f64> {
        match self {
            Self::Poisson { .. } => None,
            Self::StableHalf { t } => Some(stable_half_density(*t, s)),
            Self::Numeric { g, t } => Some(stehfest(g, *t, s).value),
        }
    }

    /// `ν([0, ∞))`. For the stable law this integrates the density itself.
    pub fn total_mass(&self) -> Result<f64> {
        match self {
            Self::Poisson { atoms, .. } => Ok(atoms.iter().map(|a| a.1).sum()),
            Self::StableHalf { .. } => {
                // s = t²σ maps η_t onto η_1, so the mass does not depend on t.
                let est = quad::half_line(|x| stable_half_density(1.0, x), 0.0, Tail::Power(1.5), tight())?;
                Ok(est.value)
            }
            Self::Numeric { .. } => Err(Error::Precondition(
                "the mass of a reconstructed density is not certified".into(),
            )),
        }
    }

    /// `∫ e^{−sx} dν(s)` computed from the measure, not from `g`.
    pub fn laplace(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::Domain {
                value: x,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
        match self {
            Self::Poisson { atoms, .. } => Ok(atoms.iter().map(|&(s, w)| w * (-s * x).exp()).sum()),
            Self::StableHalf { t } => {
                // u = t²/(4s), then w = √u: (2/√π) ∫ e^{−w² − x t²/(4w²)} dw.
                let c = x * t * t / 4.0;
                // The integrand peaks at w = c^{1/4}.
                let est = quad::adaptive(
                    |w| {
                        if w <= 0.0 {
                            return if c == 0.0 { 1.0 } else { 0.0 };
                        }
                        (-w * w - c / (w * w)).exp()
                    },
                    0.0,
                    STABLE_W_MAX + (c.sqrt()).sqrt(),
                    tight(),
                )?;
                Ok(2.0 / PI.sqrt() * est.value)
            }
            Self::Numeric { g, t } => {
                if x == 0.0 {
                    return self.total_mass();
                }
                let (g, t) = (g.clone(), *t);
                let est = quad::half_line(
                    move |s| (-s * x).exp() * stehfest(&g, t, s).value,
                    0.0,
                    Tail::Rapid,
                    Tolerance::relative(1e-8),
                )?;
                Ok(est.value)
            }
        }
    }

    /// Largest `|laplace(x) − e^{−t g(x)}|` over `xs`.
    pub fn laplace_gap(&self, xs: &[f64]) -> Result<f64> {
        let g = self.exponent();
        let t = self.time();
        let mut worst: f64 = 0.0;
        for &x in xs {
            let exact = (-t * g.eval(x)).exp();
            worst = worst.max((self.laplace(x)? - exact).abs());
        }
        Ok(worst)
    }
}

/// `T^g_t f = ∫ T_s f dν(s)` with `T_s = e^{−s φ(A)}`, by summation over
/// atoms or quadrature against the density.
pub fn subordinate_semigroup(
    model: &SpectralModel,
    base_phi: &Phi,
    measure: &SubordinatorMeasure,
    f: &TestFunction,
) -> Result<TestFunction> {
    if f.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Precondition("test function has non-finite values".into()));
    }
    let semigroup = |s: f64| {
        model.apply(
            |l| {
                let v = base_phi.eval(l);
                if v == 0.0 {
                    1.0
                } else {
                    (-s * v).exp()
                }
            },
            &f.values,
        )
    };
    let values = match measure {
        SubordinatorMeasure::Poisson { atoms, .. } => {
            let mut acc = vec![0.0; f.values.len()];
            for &(s, w) in atoms {
                for (a, v) in acc.iter_mut().zip(semigroup(s)?) {
                    *a += w * v;
                }
            }
            acc
        }
        SubordinatorMeasure::StableHalf { t } => {
            let c = t * t / 4.0;
            let failure = std::cell::RefCell::new(None);
            let (v, _) = quad::adaptive_vec(
                |w| {
                    let weight = 2.0 / PI.sqrt() * (-w * w).exp();
                    match semigroup(c / (w * w)) {
                        Ok(tf) => tf.into_iter().map(|x| weight * x).collect(),
                        Err(e) => {
                            failure.borrow_mut().get_or_insert(e);
                            vec![f64::NAN; f.values.len()]
                        }
                    }
                },
                0.0,
                STABLE_W_MAX,
                Tolerance {
                    abs: 1e-14 * f.l2.max(f64::MIN_POSITIVE),
                    rel: 1e-11,
                    max_intervals: 2000,
                },
            )
            .map_err(|e| failure.borrow_mut().take().unwrap_or(e))?;
            v
        }
        SubordinatorMeasure::Numeric { .. } => {
            return Err(Error::Precondition(
                "reconstructed densities are diagnostic and not used to build semigroups".into(),
            ))
        }
    };
    Ok(TestFunction::new(model, values))
}

/// `e^{−t g(φ(A))} f`, the symbol route the subordination formula must match.
pub fn symbol_semigroup(
    model: &SpectralModel,
    base_phi: &Phi,
    g: &BernsteinFunction,
    t: f64,
    f: &TestFunction,
) -> Result<TestFunction> {
    let values = model.apply(|l| (-t * g.eval(base_phi.eval(l))).exp(), &f.values)?;
    Ok(TestFunction::new(model, values))
}

/// One Gaver–Stehfest value with its cancellation diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StehfestValue {
    pub s: f64,
    pub value: f64,
    /// `log₁₀(Σ|terms| / |Σ terms|)`.
    pub digits_lost: f64,
    pub unstable: bool,
}

fn stehfest_weights(n: usize) -> Vec<f64> {
    let half = n / 2;
    let fact = |k: usize| (1..=k).fold(1.0f64, |a, i| a * i as f64);
    (1..=n)
        .map(|k| {
            let lo = k.div_ceil(2);
            let hi = k.min(half);
            let sum: f64 = (lo..=hi)
                .map(|j| {
                    (j as f64).powi(half as i32) * fact(2 * j)
                        / (fact(half - j) * fact(j) * fact(j - 1) * fact(k - j) * fact(2 * j - k))
                })
                .sum();
            if (k + half).is_multiple_of(2) {
                sum
            } else {
                -sum
            }
        })
        .collect()
}

fn stehfest(g: &BernsteinFunction, t: f64, s: f64) -> StehfestValue {
    thread_local! {
        static WEIGHTS: Vec<f64> = stehfest_weights(STEHFEST_N);
    }
    if !(s > 0.0) {
        return StehfestValue {
            s,
            value: 0.0,
            digits_lost: 0.0,
            unstable: false,
        };
    }
    let a = LN_2 / s;
    WEIGHTS.with(|v| {
        let mut sum = 0.0;
        let mut abs = 0.0;
        for (k, &vk) in v.iter().enumerate() {
            let term = vk * (-t * g.eval((k + 1) as f64 * a)).exp();
            sum += term;
            abs += term.abs();
        }
        let digits_lost = if abs == 0.0 {
            0.0
        } else if sum == 0.0 {
            f64::INFINITY
        } else {
            (abs / sum.abs()).log10()
        };
        StehfestValue {
            s,
            value: a * sum,
            digits_lost,
            unstable: digits_lost > STEHFEST_MAX_DIGITS_LOST,
        }
    })
}

/// Heuristic density of `ν_t^g` at each `s`. Accuracy is not certified; use
/// the Laplace round trip to judge it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InverseLaplace {
    pub g: String,
    pub t: f64,
    pub values: Vec<StehfestValue>,
    pub unstable: bool,
    pub warning: &'static str,
}

pub fn numeric_inverse_laplace(g: &BernsteinFunction, t: f64, s_grid: &[f64]) -> Result<InverseLaplace> {
    if !(t > 0.0) {
        return Err(Error::ParameterOutOfRange(format!("t = {t} must be positive")));
    }
    if let Some(&s) = s_grid.iter().find(|&&s| !(s > 0.0)) {
        return Err(Error::Domain {
            value: s,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    let values: Vec<StehfestValue> = s_grid.iter().map(|&s| stehfest(g, t, s)).collect();
    Ok(InverseLaplace {
        g: g.name(),
        t,
        unstable: values.iter().any(|v| v.unstable),
        values,
        warning: "Gaver-Stehfest reconstruction; accuracy is heuristic",
    })
}
