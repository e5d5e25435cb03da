//! Bernstein functions: the catalog, Lévy–Khintchine data, inversion and
//! numerical validation.
//!
//! Catalog members are addressed by string ids shared with the CLI:
//! `power:α`, `log1p`, `logpow:α,γ`, `elementary:λ`, `affine:a,b`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::growth::Growth;
use crate::optimize::solve_increasing;
use crate::quad::{self, Estimate, Tail, Tolerance};

/// Density of a Lévy measure on `(0, ∞)` with declared endpoint behaviour:
/// `density(λ) ~ λ^origin_exponent` at `0⁺` and `tail` at infinity.
#[derive(Clone)]
pub struct Density {
    pub eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub origin_exponent: f64,
    pub tail: Tail,
}

impl fmt::Debug for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Density")
            .field("origin_exponent", &self.origin_exponent)
            .field("tail", &self.tail)
            .finish()
    }
}

/// A positive measure on `(0, ∞)`.
#[derive(Debug, Clone)]
pub enum Measure1D {
    Atoms(Vec<(f64, f64)>),
    Density(Density),
}

impl Measure1D {
    pub fn zero() -> Self {
        Measure1D::Atoms(Vec::new())
    }

    pub fn atoms(atoms: Vec<(f64, f64)>) -> Result<Self> {
        for &(loc, mass) in &atoms {
            if !(loc > 0.0 && loc.is_finite()) || !(mass > 0.0 && mass.is_finite()) {
                return Err(Error::ParameterOutOfRange(format!(
                    "atom ({loc}, {mass}) needs positive location and mass"
                )));
            }
        }
        Ok(Measure1D::Atoms(atoms))
    }

    /// `∫ φ dν` for a non-negative `φ` whose behaviour at the origin is
    /// `φ(λ) ~ λ^phi_origin` and which is bounded at infinity.
    fn integrate<F: Fn(f64) -> f64>(&self, phi: F, phi_origin: f64, tol: Tolerance) -> Result<Estimate> {
        match self {
            Measure1D::Atoms(atoms) => Ok(Estimate {
                value: atoms.iter().map(|&(l, m)| m * phi(l)).sum(),
                error: 0.0,
            }),
            Measure1D::Density(d) => {
                let integrand = |l: f64| phi(l) * (d.eval)(l);
                quad::half_line(integrand, phi_origin + d.origin_exponent, d.tail, tol)
            }
        }
    }

    /// Checks `density ≥ 0` on a log grid of `(1e-6, 1e6)`.
    pub fn density_nonnegative(&self) -> bool {
        match self {
            Measure1D::Atoms(_) => true,
            Measure1D::Density(d) => (0..=240).all(|i| {
                let l = 10f64.powf(-6.0 + 12.0 * i as f64 / 240.0);
                (d.eval)(l) >= 0.0
            }),
        }
    }
}

/// Lévy–Khintchine triple `(a, b, ν)`:
/// `g(x) = a + b x + ∫ (1 − e^{−λx}) dν(λ)`.
#[derive(Debug, Clone)]
pub struct LevyTriple {
    pub killing: f64,
    pub drift: f64,
    pub measure: Measure1D,
}

impl LevyTriple {
    pub fn new(killing: f64, drift: f64, measure: Measure1D) -> Result<Self> {
        if !(killing >= 0.0) || !(drift >= 0.0) {
            return Err(Error::ParameterOutOfRange(format!(
                "killing rate {killing} and drift {drift} must be non-negative"
            )));
        }
        if !measure.density_nonnegative() {
            return Err(Error::ParameterOutOfRange("negative Lévy density".into()));
        }
        Ok(Self {
            killing,
            drift,
            measure,
        })
    }

    /// `∫ λ/(1+λ) dν(λ)`, finite for an admissible Lévy measure.
    pub fn integrability(&self) -> Result<Estimate> {
        self.measure
            .integrate(|l| l / (1.0 + l), 1.0, Tolerance::relative(1e-10))
    }

    /// `a + b x + ∫ (1 − e^{−λx}) dν(λ)` by quadrature.
    pub fn eval(&self, x: f64, tol: Tolerance) -> Result<Estimate> {
        let jump = self.measure.integrate(|l| -(-l * x).exp_m1(), 1.0, tol)?;
        Ok(Estimate {
            value: self.killing + self.drift * x + jump.value,
            error: jump.error,
        })
    }
}

/// The catalog families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// `x^α`, `α ∈ (0, 1]`.
    Power { alpha: f64 },
    /// `ln(1 + x)`.
    Log1p,
    /// `[ln(1 + x^α)]^γ`, `α, γ ∈ (0, 1]`.
    LogPower { alpha: f64, gamma: f64 },
    /// `1 − e^{−λx}`, `λ > 0`.
    Elementary { lambda: f64 },
    /// `a + b x`, `a, b ≥ 0`.
    Affine { killing: f64, drift: f64 },
}

/// A catalog Bernstein function.
#[derive(Debug, Clone, PartialEq)]
pub struct BernsteinFunction {
    family: Family,
    closed_inverse: bool,
}

fn in_unit(v: f64) -> bool {
    v > 0.0 && v <= 1.0
}

/// `ln(e^y − 1)` without overflow.
fn ln_expm1(y: f64) -> f64 {
    if y > 30.0 {
        y + (-(-y).exp()).ln_1p()
    } else {
        y.exp_m1().ln()
    }
}

/// Builds a catalog member from its name and parameter list.
pub fn make_catalog(name: &str, params: &[f64]) -> Result<BernsteinFunction> {
    let arity = |n: usize| -> Result<()> {
        if params.len() == n {
            Ok(())
        } else {
            Err(Error::ParameterOutOfRange(format!(
                "`{name}` takes {n} parameter(s), got {}",
                params.len()
            )))
        }
    };
    let family = match name {
        "power" => {
            arity(1)?;
            if !in_unit(params[0]) {
                return Err(Error::ParameterOutOfRange(format!(
                    "power exponent {} not in (0, 1]",
                    params[0]
                )));
            }
            Family::Power { alpha: params[0] }
        }
        "log1p" => {
            arity(0)?;
            Family::Log1p
        }
        "logpow" => {
            arity(2)?;
            if !in_unit(params[0]) || !in_unit(params[1]) {
                return Err(Error::ParameterOutOfRange(format!(
                    "logpow parameters ({}, {}) not in (0, 1]",
                    params[0], params[1]
                )));
            }
            Family::LogPower {
                alpha: params[0],
                gamma: params[1],
            }
        }
        "elementary" => {
            arity(1)?;
            if !(params[0] > 0.0 && params[0].is_finite()) {
                return Err(Error::ParameterOutOfRange(format!(
                    "elementary rate {} must be positive",
                    params[0]
                )));
            }
            Family::Elementary { lambda: params[0] }
        }
        "affine" => {
            arity(2)?;
            if !(params[0] >= 0.0 && params[1] >= 0.0) || !params[0].is_finite() || !params[1].is_finite() {
                return Err(Error::ParameterOutOfRange(format!(
                    "affine coefficients ({}, {}) must be non-negative",
                    params[0], params[1]
                )));
            }
            Family::Affine {
                killing: params[0],
                drift: params[1],
            }
        }
        other => return Err(Error::UnknownFamily(other.to_string())),
    };
    Ok(BernsteinFunction {
        family,
        closed_inverse: true,
    })
}

impl FromStr for BernsteinFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "identity" || s == "id" {
            return make_catalog("affine", &[0.0, 1.0]);
        }
        let (name, rest) = match s.split_once(':') {
            Some((n, r)) => (n, r),
            None => (s, ""),
        };
        let params = parse_params(s, rest)?;
        make_catalog(name, &params)
    }
}

pub(crate) fn parse_params(spec: &str, rest: &str) -> Result<Vec<f64>> {
    if rest.trim().is_empty() {
        return Ok(Vec::new());
    }
    rest.split(',')
        .map(|p| {
            p.trim().parse::<f64>().map_err(|e| Error::Parse {
                spec: spec.to_string(),
                reason: format!("`{p}`: {e}"),
            })
        })
        .collect()
}

impl fmt::Display for BernsteinFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::Power { alpha } => write!(f, "power:{alpha}"),
            Family::Log1p => write!(f, "log1p"),
            Family::LogPower { alpha, gamma } => write!(f, "logpow:{alpha},{gamma}"),
            Family::Elementary { lambda } => write!(f, "elementary:{lambda}"),
            Family::Affine { killing, drift } => write!(f, "affine:{killing},{drift}"),
        }
    }
}

impl BernsteinFunction {
    pub fn family(&self) -> Family {
        self.family
    }

    /// Catalog id, e.g. `power:0.5`.
    pub fn name(&self) -> String {
        self.to_string()
    }

    pub fn has_closed_inverse(&self) -> bool {
        self.closed_inverse
    }

    /// Same function with the closed-form inverse switched off, so that
    /// [`invert`](Self::invert) goes through bracketing bisection.
    pub fn without_closed_inverse(&self) -> Self {
        Self {
            closed_inverse: false,
            ..self.clone()
        }
    }

    /// `g(x)` for `x ≥ 0` (at `0` this is the limit `g(0⁺)`).
    pub fn eval(&self, x: f64) -> f64 {
        match self.family {
            Family::Power { alpha } => {
                if alpha == 1.0 {
                    x
                } else {
                    x.powf(alpha)
                }
            }
            Family::Log1p => x.ln_1p(),
            Family::LogPower { alpha, gamma } => x.powf(alpha).ln_1p().powf(gamma),
            Family::Elementary { lambda } => -(-lambda * x).exp_m1(),
            Family::Affine { killing, drift } => {
                if drift == 0.0 {
                    killing
                } else {
                    killing + drift * x
                }
            }
        }
    }

    /// `g(0⁺)`.
    pub fn g0(&self) -> f64 {
        match self.family {
            Family::Affine { killing, .. } => killing,
            _ => 0.0,
        }
    }

    /// `g(+∞)`, possibly `+∞`.
    pub fn ginf(&self) -> f64 {
        match self.family {
            Family::Elementary { .. } => 1.0,
            Family::Affine { killing, drift } if drift == 0.0 => killing,
            _ => f64::INFINITY,
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.ginf().is_finite()
    }

    /// Constant functions are representable but rejected by every transfer.
    pub fn is_constant(&self) -> bool {
        matches!(self.family, Family::Affine { drift, .. } if drift == 0.0)
    }

    /// Bijection of `[0, ∞)` onto itself.
    pub fn is_bijective(&self) -> bool {
        self.g0() == 0.0 && self.ginf() == f64::INFINITY
    }

    /// Lévy–Khintchine triple where it is known in closed form.
    pub fn triple(&self) -> Option<LevyTriple> {
        let t = match self.family {
            Family::Power { alpha } if alpha == 1.0 => LevyTriple {
                killing: 0.0,
                drift: 1.0,
                measure: Measure1D::zero(),
            },
            Family::Power { alpha } => {
                let c = alpha / gamma(1.0 - alpha);
                LevyTriple {
                    killing: 0.0,
                    drift: 0.0,
                    measure: Measure1D::Density(Density {
                        eval: Arc::new(move |l: f64| c * l.powf(-1.0 - alpha)),
                        origin_exponent: -1.0 - alpha,
                        tail: Tail::Power(1.0 + alpha),
                    }),
                }
            }
            Family::Log1p => LevyTriple {
                killing: 0.0,
                drift: 0.0,
                measure: Measure1D::Density(Density {
                    eval: Arc::new(|l: f64| (-l).exp() / l),
                    origin_exponent: -1.0,
                    tail: Tail::Rapid,
                }),
            },
            Family::LogPower { .. } => return None,
            Family::Elementary { lambda } => LevyTriple {
                killing: 0.0,
                drift: 0.0,
                measure: Measure1D::Atoms(vec![(lambda, 1.0)]),
            },
            Family::Affine { killing, drift } => LevyTriple {
                killing,
                drift,
                measure: Measure1D::zero(),
            },
        };
        Some(t)
    }

    /// Growth of `g` at infinity.
    pub fn growth(&self) -> Growth {
        match self.family {
            Family::Power { alpha } => Growth::power(1.0, alpha),
            Family::Log1p => Growth {
                coeff: 1.0,
                power: 0.0,
                log_power: 1.0,
            },
            Family::LogPower { alpha, gamma } => Growth {
                coeff: alpha.powf(gamma),
                power: 0.0,
                log_power: gamma,
            },
            Family::Elementary { .. } => Growth::bounded(1.0),
            Family::Affine { killing, drift } => {
                if drift > 0.0 {
                    Growth::power(drift, 1.0)
                } else {
                    Growth::bounded(killing)
                }
            }
        }
    }

    fn closed_form_inverse(&self, y: f64) -> f64 {
        match self.family {
            Family::Power { alpha } => {
                if alpha == 1.0 {
                    y
                } else {
                    y.powf(1.0 / alpha)
                }
            }
            Family::Log1p => y.exp_m1(),
            Family::LogPower { alpha, gamma } => y.powf(1.0 / gamma).exp_m1().powf(1.0 / alpha),
            Family::Elementary { lambda } => -(-y).ln_1p() / lambda,
            Family::Affine { killing, drift } => (y - killing) / drift,
        }
    }

    fn check_range(&self, y: f64) -> Result<()> {
        if self.is_constant() {
            return Err(Error::ConstantFunction(self.name()));
        }
        let (lo, hi) = (self.g0(), self.ginf());
        if !(y > lo && y < hi) {
            return Err(Error::Domain { value: y, lo, hi });
        }
        Ok(())
    }

    /// `g^{-1}(y)` for `y ∈ (g(0⁺), g(∞))`.
    pub fn invert(&self, y: f64) -> Result<f64> {
        self.check_range(y)?;
        if self.closed_inverse {
            return Ok(self.closed_form_inverse(y));
        }
        solve_increasing(|x| self.eval(x), y, 1.0, 1e-15, 1100)
            .ok_or_else(|| Error::InversionFailed(format!("no bracket for {} = {y}", self.name())))
    }

    /// `ln g^{-1}(y)`, evaluated without overflow for large `y`.
    pub fn ln_inverse(&self, y: f64) -> Result<f64> {
        self.check_range(y)?;
        if !self.closed_inverse {
            return self.invert(y).map(f64::ln);
        }
        Ok(match self.family {
            Family::Power { alpha } => y.ln() / alpha,
            Family::Log1p => ln_expm1(y),
            Family::LogPower { alpha, gamma } => ln_expm1(y.powf(1.0 / gamma)) / alpha,
            _ => self.closed_form_inverse(y).ln(),
        })
    }

    /// `sup{s ≥ 0 : g(s) ≤ u}`; `+∞` once `u` reaches `g(∞)`.
    pub fn generalized_inverse(&self, u: f64) -> f64 {
        if u < self.g0() {
            return 0.0;
        }
        if u >= self.ginf() || self.is_constant() {
            return f64::INFINITY;
        }
        if u == self.g0() {
            return 0.0;
        }
        self.invert(u).unwrap_or(f64::INFINITY)
    }

    /// `x ↦ e^{−t g(x)}`, the symbol of the subordinated semigroup.
    pub fn time_scaled(&self, t: f64) -> impl Fn(f64) -> f64 + Send + Sync + Clone + 'static {
        let g = self.clone();
        move |x| (-t * g.eval(x)).exp()
    }
}

/// `x ↦ e^{−t g(x)}`.
pub fn compose_time_scaling(g: &BernsteinFunction, t: f64) -> impl Fn(f64) -> f64 + Send + Sync + Clone + 'static {
    g.time_scaled(t)
}

/// `g(x)` through its Lévy triple, with the quadrature error estimate.
pub fn eval_via_levy(g: &BernsteinFunction, x: f64) -> Result<Estimate> {
    let triple = g
        .triple()
        .ok_or_else(|| Error::Precondition(format!("{} has no registered Lévy triple", g.name())))?;
    if !(x > 0.0) {
        return Err(Error::Domain {
            value: x,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    triple.eval(x, Tolerance::relative(1e-12))
}

/// `sup{s ≥ 0 : f(s) ≤ u}` for an arbitrary non-decreasing `f` with `f(0) = 0`.
pub fn generalized_inverse_fn<F: Fn(f64) -> f64>(f: F, u: f64) -> f64 {
    if u < 0.0 {
        return 0.0;
    }
    let mut hi = 1.0;
    let mut n = 0;
    while f(hi) <= u {
        hi *= 2.0;
        n += 1;
        if n > 1100 || !hi.is_finite() {
            return f64::INFINITY;
        }
    }
    let mut lo = 0.0f64;
    if f(0.0) > u {
        return 0.0;
    }
    // Shrink towards the origin geometrically first.
    let mut probe = hi;
    while probe > f64::MIN_POSITIVE {
        probe *= 0.5;
        if f(probe) <= u {
            lo = probe;
            break;
        }
        hi = probe;
    }
    if lo == 0.0 {
        return 0.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) <= u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Outcome of the numerical Bernstein-function checks on a grid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BernsteinCheck {
    pub points: usize,
    pub monotonicity_violations: usize,
    pub concavity_violations: usize,
    pub complete_monotonicity_violations: usize,
    /// Largest relative gap between `eval` and the Lévy representation.
    pub levy_max_rel_gap: Option<f64>,
}

impl BernsteinCheck {
    pub fn passed(&self, levy_tol: f64) -> bool {
        self.monotonicity_violations == 0
            && self.concavity_violations == 0
            && self.complete_monotonicity_violations == 0
            && self.levy_max_rel_gap.is_none_or(|g| g <= levy_tol)
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Monotonicity and concavity through divided differences on a log grid of
/// `points` nodes in `[lo, hi]`, a 4th-order complete-monotonicity spot check
/// with central differences (step `x·1e-2`), and, when a triple is present,
/// agreement with the Lévy–Khintchine integral on a coarser sub-grid.
pub fn check_bernstein(g: &BernsteinFunction, lo: f64, hi: f64, points: usize, levy_samples: usize) -> BernsteinCheck {
    let xs: Vec<f64> = (0..points)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (points - 1) as f64).exp())
        .collect();
    let ys: Vec<f64> = xs.iter().map(|&x| g.eval(x)).collect();
    let eps = f64::EPSILON;
    let mut report = BernsteinCheck {
        points,
        ..Default::default()
    };
    let slopes: Vec<f64> = (0..points - 1)
        .map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]))
        .collect();
    for i in 0..points - 1 {
        let noise = 8.0 * eps * (ys[i].abs() + ys[i + 1].abs()) / (xs[i + 1] - xs[i]);
        if slopes[i] < -noise {
            report.monotonicity_violations += 1;
        }
    }
    for i in 0..points - 2 {
        let noise = 16.0 * eps * (ys[i].abs() + ys[i + 1].abs() + ys[i + 2].abs())
            / ((xs[i + 1] - xs[i]).min(xs[i + 2] - xs[i + 1]));
        if slopes[i + 1] - slopes[i] > noise {
            report.concavity_violations += 1;
        }
    }
    for &x in &xs {
        let h = 1e-2 * x;
        for n in 1..=4usize {
            let mut diff = 0.0;
            let mut scale = 0.0;
            for k in 0..=n {
                let v = g.eval(x + (n as f64 / 2.0 - k as f64) * h);
                let c = binomial(n, k);
                diff += if k % 2 == 0 { c * v } else { -c * v };
                scale += c * v.abs();
            }
            let signed = if n % 2 == 1 { diff } else { -diff };
            if signed < -64.0 * eps * scale {
                report.complete_monotonicity_violations += 1;
            }
        }
    }
    if let Some(triple) = g.triple() {
        let step = (points / levy_samples.max(1)).max(1);
        let mut gap: f64 = 0.0;
        for &x in xs.iter().step_by(step) {
            match triple.eval(x, Tolerance::relative(1e-10)) {
                Ok(est) => gap = gap.max((est.value - g.eval(x)).abs() / g.eval(x).abs().max(f64::MIN_POSITIVE)),
                Err(_) => gap = f64::INFINITY,
            }
        }
        report.levy_max_rel_gap = Some(gap);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, LN_2};

    fn catalog() -> Vec<BernsteinFunction> {
        [
            "power:0.5",
            "power:0.3",
            "power:1",
            "log1p",
            "logpow:0.5,1",
            "logpow:0.7,0.5",
            "elementary:1",
            "elementary:2.5",
            "affine:0,1",
            "affine:0.5,2",
        ]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect()
    }

    #[test]
    fn catalog_closed_forms() {
        let sqrt: BernsteinFunction = "power:0.5".parse().unwrap();
        assert!((sqrt.eval(4.0) - 2.0).abs() < 1e-15);
        let log1p = make_catalog("log1p", &[]).unwrap();
        assert!((log1p.eval(E - 1.0) - 1.0).abs() < 1e-15);
        let elem = make_catalog("elementary", &[1.0]).unwrap();
        assert_eq!(elem.eval(f64::INFINITY), 1.0);
        assert_eq!(elem.ginf(), 1.0);
        assert!(elem.is_bounded());
    }

    #[test]
    fn catalog_errors() {
        assert!(matches!(make_catalog("nope", &[]), Err(Error::UnknownFamily(_))));
        assert!(matches!(
            make_catalog("power", &[1.5]),
            Err(Error::ParameterOutOfRange(_))
        ));
        assert!(matches!(
            make_catalog("power", &[0.0]),
            Err(Error::ParameterOutOfRange(_))
        ));
        assert!(matches!(
            make_catalog("logpow", &[0.5, 1.2]),
            Err(Error::ParameterOutOfRange(_))
        ));
        assert!(matches!(
            make_catalog("elementary", &[-1.0]),
            Err(Error::ParameterOutOfRange(_))
        ));
        assert!(matches!(
            make_catalog("affine", &[-1.0, 0.0]),
            Err(Error::ParameterOutOfRange(_))
        ));
        assert!("power:abc".parse::<BernsteinFunction>().is_err());
    }

    #[test]
    fn ids_round_trip() {
        for g in catalog() {
            let again: BernsteinFunction = g.name().parse().unwrap();
            assert_eq!(again, g);
        }
    }

    #[test]
    fn levy_triples_match_closed_forms() {
        let sqrt: BernsteinFunction = "power:0.5".parse().unwrap();
        let v = eval_via_levy(&sqrt, 1.0).unwrap();
        assert!((v.value - 1.0).abs() < 1e-8, "{v:?}");
        let log1p: BernsteinFunction = "log1p".parse().unwrap();
        let v = eval_via_levy(&log1p, 1.0).unwrap();
        assert!((v.value - LN_2).abs() < 1e-8, "{v:?}");
        let drift = LevyTriple::new(0.0, 1.0, Measure1D::zero()).unwrap();
        assert_eq!(drift.eval(3.5, Tolerance::default()).unwrap().value, 3.5);
    }

    #[test]
    fn levy_agreement_over_wide_range() {
        for id in ["power:0.5", "power:0.25", "power:0.9", "log1p"] {
            let g: BernsteinFunction = id.parse().unwrap();
            for i in 0..=24 {
                let x = 10f64.powf(-3.0 + 6.0 * i as f64 / 24.0);
                let v = eval_via_levy(&g, x).unwrap().value;
                let rel = (v - g.eval(x)).abs() / g.eval(x);
                assert!(rel < 1e-6, "{id} at {x}: {rel}");
            }
        }
    }

    #[test]
    fn levy_integrability() {
        for g in catalog() {
            if let Some(t) = g.triple() {
                assert!(t.integrability().unwrap().value.is_finite());
            }
        }
        assert!(LevyTriple::new(-1.0, 0.0, Measure1D::zero()).is_err());
        assert!(Measure1D::atoms(vec![(0.0, 1.0)]).is_err());
    }

    #[test]
    fn missing_triple_is_an_error() {
        let g: BernsteinFunction = "logpow:0.5,1".parse().unwrap();
        assert!(matches!(eval_via_levy(&g, 1.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn inversion_examples() {
        let log1p: BernsteinFunction = "log1p".parse().unwrap();
        assert!((log1p.invert(1.0).unwrap() - (E - 1.0)).abs() < 1e-15);
        let elem: BernsteinFunction = "elementary:1".parse().unwrap();
        assert!((elem.invert(0.5).unwrap() - LN_2).abs() < 1e-15);
        let sqrt = "power:0.5"
            .parse::<BernsteinFunction>()
            .unwrap()
            .without_closed_inverse();
        assert!((sqrt.invert(3.0).unwrap() - 9.0).abs() < 1e-10);
    }

    #[test]
    fn inversion_errors() {
        let elem: BernsteinFunction = "elementary:1".parse().unwrap();
        assert!(matches!(elem.invert(1.0), Err(Error::Domain { .. })));
        assert!(matches!(elem.invert(0.0), Err(Error::Domain { .. })));
        let constant: BernsteinFunction = "affine:2,0".parse().unwrap();
        assert!(constant.is_constant());
        assert!(matches!(constant.invert(2.0), Err(Error::ConstantFunction(_))));
    }

    #[test]
    fn invert_eval_identity() {
        for g in catalog().into_iter().filter(|g| !g.is_constant()) {
            for bisect in [false, true] {
                let g = if bisect { g.without_closed_inverse() } else { g.clone() };
                for i in 0..=40 {
                    let x = 10f64.powf(-3.0 + 6.0 * i as f64 / 40.0);
                    let y = g.eval(x);
                    if !(y > g.g0() && y < g.ginf()) {
                        continue;
                    }
                    let back = g.invert(y).unwrap();
                    // Near the saturation of bounded members the inverse is
                    // ill-conditioned; skip where g' x / g is below 1e-6.
                    let cond = (g.eval(x * (1.0 + 1e-6)) - y) / (y * 1e-6);
                    if cond < 1e-3 {
                        continue;
                    }
                    assert!((back - x).abs() <= 1e-9 * x / cond.min(1.0), "{g} x={x} back={back}");
                }
            }
        }
    }

    #[test]
    fn generalized_inverse_examples() {
        let log1p: BernsteinFunction = "log1p".parse().unwrap();
        assert!((log1p.generalized_inverse(1.0) - (E - 1.0)).abs() < 1e-15);
        let elem: BernsteinFunction = "elementary:1".parse().unwrap();
        assert_eq!(elem.generalized_inverse(2.0), f64::INFINITY);
        for g in catalog() {
            if g.g0() == 0.0 {
                assert_eq!(g.generalized_inverse(0.0), 0.0);
            }
        }
        let generic = generalized_inverse_fn(|s: f64| s.sqrt(), 3.0);
        assert!((generic - 9.0).abs() < 1e-9);
        assert_eq!(generalized_inverse_fn(|s: f64| -(-s).exp_m1(), 2.0), f64::INFINITY);
        assert_eq!(generalized_inverse_fn(|s: f64| s, 0.0), 0.0);
    }

    #[test]
    fn generalized_inverse_matches_invert() {
        for g in catalog().into_iter().filter(|g| !g.is_constant()) {
            for i in 1..40 {
                let u = g.g0() + (g.ginf().min(g.g0() + 5.0) - g.g0()) * i as f64 / 40.0;
                let a = g.generalized_inverse(u);
                let b = g.invert(u).unwrap();
                assert!((a - b).abs() <= 1e-12 * b.abs(), "{g}: {a} vs {b}");
                let c = generalized_inverse_fn(|s| g.eval(s), u);
                if g.g0() == 0.0 {
                    assert!((c - b).abs() <= 1e-9 * b.abs(), "{g}: generic {c} vs {b}");
                }
            }
        }
    }

    #[test]
    fn time_scaling_examples() {
        let sqrt: BernsteinFunction = "power:0.5".parse().unwrap();
        assert!((compose_time_scaling(&sqrt, 2.0)(4.0) - (-4.0f64).exp()).abs() < 1e-16);
        let log1p: BernsteinFunction = "log1p".parse().unwrap();
        assert!((compose_time_scaling(&log1p, 1.0)(1.0) - 0.5).abs() < 1e-15);
        let elem: BernsteinFunction = "elementary:1".parse().unwrap();
        assert!((compose_time_scaling(&elem, 3.0)(f64::INFINITY) - (-3.0f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn catalog_passes_numerical_checks() {
        for g in catalog() {
            let report = check_bernstein(&g, 1e-3, 1e3, 1000, 25);
            assert!(report.passed(1e-6), "{g}: {report:?}");
        }
    }

    #[test]
    fn non_bernstein_is_caught() {
        // x^{1.5} is not concave; reuse the grid machinery through a fake
        // power member by checking divided differences directly.
        let xs: Vec<f64> = (0..100).map(|i| 0.1 + i as f64 * 0.1).collect();
        let ys: Vec<f64> = xs.iter().map(|x: &f64| x.powf(1.5)).collect();
        let s0 = (ys[1] - ys[0]) / (xs[1] - xs[0]);
        let s1 = (ys[2] - ys[1]) / (xs[2] - xs[1]);
        assert!(s1 > s0);
    }

    #[test]
    fn ln_inverse_survives_overflow() {
        let log1p: BernsteinFunction = "log1p".parse().unwrap();
        assert!((log1p.ln_inverse(1000.0).unwrap() - 1000.0).abs() < 1e-12);
        assert!(log1p.invert(1000.0).unwrap().is_infinite());
        let lp: BernsteinFunction = "logpow:0.5,1".parse().unwrap();
        assert!((lp.ln_inverse(2.0).unwrap() - 2.0 * (2f64.exp_m1()).ln()).abs() < 1e-13);
    }
}
