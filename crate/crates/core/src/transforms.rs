//! Transfer of rate and Nash functions along a Bernstein function `g`, the
//! convex-`Ψ` transfer, and the change of variables between the profile and
//! its `I − T_t` form.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::bernstein::{parse_params, BernsteinFunction, Family};
use crate::error::{Error, Result};
use crate::growth::Growth;
use crate::legendre::{conjugate, nash_to_beta, NashFunction, RateFunction, RealFn};
use crate::optimize::{log_space, solve_increasing, sup_above_one, sup_log, sup_unit_interval, LogGrid};

/// `β_g(r) = β(1 / g^{-1}(1/r))` on `(1/g(∞), 1/g(0⁺))`, extended by `0` on
/// `[1/g(0⁺), ∞)` when `g(0⁺) > 0`.
#[derive(Debug, Clone)]
pub struct TransferredRate {
    base: RateFunction,
    g: BernsteinFunction,
    lo: f64,
    hi: f64,
    rate: RateFunction,
}

fn reciprocal(v: f64) -> f64 {
    if v == 0.0 {
        f64::INFINITY
    } else if v.is_infinite() {
        0.0
    } else {
        1.0 / v
    }
}

impl TransferredRate {
    pub fn base(&self) -> &RateFunction {
        &self.base
    }

    pub fn g(&self) -> &BernsteinFunction {
        &self.g
    }

    /// Interval on which the composition formula applies.
    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// Start of the zero piece, when `g(0⁺) > 0`.
    pub fn zero_from(&self) -> Option<f64> {
        (self.g.g0() > 0.0).then_some(self.hi)
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.rate.eval(r)
    }

    pub fn try_eval(&self, r: f64) -> Result<f64> {
        let hi = if self.g.g0() > 0.0 { f64::INFINITY } else { self.hi };
        if r > self.lo && r < hi {
            Ok(self.rate.eval(r))
        } else {
            Err(Error::Domain {
                value: r,
                lo: self.lo,
                hi,
            })
        }
    }

    pub fn rate(&self) -> &RateFunction {
        &self.rate
    }

    pub fn into_rate(self) -> RateFunction {
        self.rate
    }
}

/// Transfers a super-Poincaré rate along `g`.
pub fn transfer_beta(beta: &RateFunction, g: &BernsteinFunction) -> Result<TransferredRate> {
    if g.is_constant() {
        return Err(Error::ConstantFunction(g.name()));
    }
    let lo = reciprocal(g.ginf());
    let hi = reciprocal(g.g0());
    let (b, gg) = (beta.clone(), g.clone());
    let label = format!("transfer({},{})", beta.label(), g.name());
    let zero_piece = g.g0() > 0.0;
    let rate_hi = if zero_piece { f64::INFINITY } else { hi };
    let rate = RateFunction::new(label, lo, rate_hi, move |r: f64| {
        if r >= hi {
            return 0.0;
        }
        match gg.invert(1.0 / r) {
            Ok(x) => b.eval(reciprocal(x)),
            Err(_) => f64::INFINITY,
        }
    });
    Ok(TransferredRate {
        base: beta.clone(),
        g: g.clone(),
        lo,
        hi,
        rate,
    })
}

fn check_finite_rate(beta: &RateFunction) -> Result<()> {
    for r in log_space(1e-6, 1e6, 25) {
        let v = beta.eval(r);
        if !v.is_finite() {
            return Err(Error::Precondition(format!(
                "conjugate rate `{}` is infinite at r = {r}",
                beta.label()
            )));
        }
    }
    Ok(())
}

/// `D_{g,β}(x) = sup_{u>0} g(u) (1 − β(1/u)/x)` with `β = nash_to_beta(D)`.
///
/// The registered growth of the result is that of `g ∘ D`, which bounds
/// `D_{g,β}` from above.
pub fn transfer_nash(d: &NashFunction, g: &BernsteinFunction) -> Result<NashFunction> {
    if g.is_constant() {
        return Err(Error::ConstantFunction(g.name()));
    }
    let beta = nash_to_beta(d)?;
    check_finite_rate(&beta)?;
    Ok(transfer_nash_with_rate(d, &beta, g))
}

/// [`transfer_nash`] with the conjugate rate already available.
pub fn transfer_nash_with_rate(d: &NashFunction, beta: &RateFunction, g: &BernsteinFunction) -> NashFunction {
    let (b, gg) = (beta.clone(), g.clone());
    let out = NashFunction::new(format!("transfer({},{})", d.label(), g.name()), move |x: f64| {
        let s = sup_log(|u| gg.eval(u) * (1.0 - b.eval(1.0 / u) / x), &LogGrid::default());
        if s.diverged {
            f64::INFINITY
        } else {
            s.value.max(0.0)
        }
    });
    match d.growth() {
        Some(inner) => out.with_growth(Growth::compose(g.growth(), inner)),
        None => out,
    }
}

/// Evaluator for the two-sided estimate of `D_{g,β}`.
#[derive(Debug, Clone)]
pub struct Sandwich {
    d: NashFunction,
    g: BernsteinFunction,
}

impl Sandwich {
    /// Requires `g` bijective and `β = nash_to_beta(D)` strictly decreasing
    /// and finite on a sample grid.
    pub fn new(d: &NashFunction, g: &BernsteinFunction) -> Result<Self> {
        if !g.is_bijective() {
            return Err(Error::Precondition(format!(
                "`{}` is not a bijection of (0, ∞)",
                g.name()
            )));
        }
        let beta = nash_to_beta(d)?;
        let grid = log_space(1e-4, 1e4, 41);
        let values: Vec<f64> = grid.iter().map(|&r| beta.eval(r)).collect();
        let strictly_decreasing =
            values.iter().all(|v| v.is_finite() && *v > 0.0) && values.windows(2).all(|w| w[1] < w[0]);
        if !strictly_decreasing {
            return Err(Error::Precondition(format!(
                "conjugate rate of `{}` is not a decreasing bijection",
                d.label()
            )));
        }
        Ok(Self {
            d: d.clone(),
            g: g.clone(),
        })
    }

    /// `g(D(x))`.
    pub fn upper(&self, x: f64) -> f64 {
        self.g.eval(self.d.eval(x))
    }

    /// `sup_{ρ>1} (1 − 1/ρ) g(D(x/ρ))`.
    pub fn lower(&self, x: f64) -> f64 {
        if self.d.eval(x) == 0.0 {
            return 0.0;
        }
        sup_above_one(|rho| (1.0 - 1.0 / rho) * self.g.eval(self.d.eval(x / rho)), 128, 40)
            .value
            .max(0.0)
    }

    pub fn bounds(&self, x: f64) -> (f64, f64) {
        (self.lower(x), self.upper(x))
    }
}

/// `(lower, upper)` with `lower ≤ D_{g,β}(x) ≤ upper`.
pub fn sandwich_bounds(d: &NashFunction, g: &BernsteinFunction, x: f64) -> Result<(f64, f64)> {
    Ok(Sandwich::new(d, g)?.bounds(x))
}

/// A non-decreasing convex `Ψ` whose conjugate `Ψ*` is a bijection of `(0, ∞)`.
#[derive(Clone)]
pub struct ConvexPsi {
    pub label: String,
    pub psi: RealFn,
    pub psi_star: RealFn,
    pub psi_star_inverse: RealFn,
}

impl fmt::Debug for ConvexPsi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConvexPsi").field("label", &self.label).finish()
    }
}

impl ConvexPsi {
    /// `Ψ(x) = x^p`, `p > 1`, with `Ψ*(s) = (p−1)(s/p)^{p/(p−1)}`.
    pub fn power(p: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::ParameterOutOfRange(format!("power Ψ needs p > 1, got {p}")));
        }
        let q = p / (p - 1.0);
        Ok(Self {
            label: format!("power:{p}"),
            psi: Arc::new(move |x: f64| x.powf(p)),
            psi_star: Arc::new(move |s: f64| (p - 1.0) * (s / p).powf(q)),
            psi_star_inverse: Arc::new(move |y: f64| p * (y / (p - 1.0)).powf(1.0 / q)),
        })
    }

    /// `Ψ*` by the sup engine and its inverse by bisection. Rejects `Ψ` whose
    /// conjugate is not strictly increasing from `0` to `∞` on a sample grid.
    pub fn numeric<F>(label: impl Into<String>, psi: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let label = label.into();
        let psi: RealFn = Arc::new(psi);
        let p2 = psi.clone();
        let psi_star: RealFn = Arc::new(move |s: f64| conjugate(|y| p2(y), s));
        let grid = log_space(1e-4, 1e4, 41);
        let values: Vec<f64> = grid.iter().map(|&s| psi_star(s)).collect();
        let bijective = values[0] > 0.0
            && values.iter().all(|v| v.is_finite())
            && values.windows(2).all(|w| w[1] > w[0])
            && values[values.len() - 1] > 1e3 * values[0];
        if !bijective {
            return Err(Error::Precondition(format!(
                "conjugate of Ψ = `{label}` is not a bijection of (0, ∞)"
            )));
        }
        let ps = psi_star.clone();
        let psi_star_inverse: RealFn =
            Arc::new(move |y: f64| solve_increasing(|s| ps(s), y, 1.0, 1e-12, 200).unwrap_or(f64::NAN));
        Ok(Self {
            label,
            psi,
            psi_star,
            psi_star_inverse,
        })
    }
}

/// `power:p` (closed form) or `exp` (`e^x − 1`, numeric; rejected because its
/// conjugate vanishes on `(0, 1]`).
impl FromStr for ConvexPsi {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let p = parse_params(s, rest)?;
        match (name, p.as_slice()) {
            ("power", [p]) => ConvexPsi::power(*p),
            ("exp", []) => ConvexPsi::numeric("exp", |x: f64| x.exp_m1()),
            ("power" | "exp", _) => Err(Error::ParameterOutOfRange(format!("wrong parameters in `{s}`"))),
            (other, _) => Err(Error::UnknownFamily(other.to_string())),
        }
    }
}

/// `γ_Ψ(t) = inf_{0<ε<1} (1/ε) γ(ε t (Ψ*)^{-1}((1−ε)/(ε t)))`.
///
/// The infimum is taken over evaluated points only, so the returned value is
/// never below the exact infimum.
pub fn transfer_convex(gamma: &RateFunction, psi: &ConvexPsi) -> Result<RateFunction> {
    let probe = (psi.psi_star_inverse)(1.0);
    if !(probe.is_finite() && probe > 0.0) {
        return Err(Error::InversionFailed(format!(
            "(Ψ*)^{{-1}} failed for `{}`",
            psi.label
        )));
    }
    let (gm, inv) = (gamma.clone(), psi.psi_star_inverse.clone());
    Ok(RateFunction::new(
        format!("convex({},{})", gamma.label(), psi.label),
        0.0,
        f64::INFINITY,
        move |t: f64| {
            let objective = |e: f64| {
                let arg = e * t * inv((1.0 - e) / (e * t));
                -gm.eval(arg) / e
            };
            -sup_unit_interval(objective, 128, 40).value
        },
    ))
}

/// `γ(r) = β_p(λ / ln(1 + 1/(r−1)))` on `r > 1`.
pub fn profile_map_forward(beta_p: &RateFunction, lambda: f64) -> Result<RateFunction> {
    if !(lambda > 0.0) {
        return Err(Error::ParameterOutOfRange(format!("λ = {lambda} must be positive")));
    }
    let b = beta_p.clone();
    Ok(RateFunction::new(
        format!("forward({},{lambda})", beta_p.label()),
        1.0,
        f64::INFINITY,
        move |r: f64| b.eval(lambda / (1.0 / (r - 1.0)).ln_1p()),
    ))
}

/// `β_p(s) = γ(1 + 1/(e^{λ/s} − 1))` on `s > 0`.
pub fn profile_map_backward(gamma_p: &RateFunction, lambda: f64) -> Result<RateFunction> {
    if !(lambda > 0.0) {
        return Err(Error::ParameterOutOfRange(format!("λ = {lambda} must be positive")));
    }
    let g = gamma_p.clone();
    Ok(RateFunction::new(
        format!("backward({},{lambda})", gamma_p.label()),
        0.0,
        f64::INFINITY,
        move |s: f64| g.eval(1.0 + 1.0 / (lambda / s).exp_m1()),
    ))
}

/// Measured ratio `β_g / asymptote` at one end of the domain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoteCheck {
    pub r: f64,
    pub asymptote: String,
    pub ln_beta_g: f64,
    pub ln_asymptote: f64,
    pub ratio: f64,
}

/// Closed-form asymptotes of `β_g` for `β(r) = c0 r^{−n/2}` at both ends.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticsReport {
    pub g: String,
    pub n: f64,
    pub c0: f64,
    pub limit_0: AsymptoteCheck,
    pub limit_inf: AsymptoteCheck,
}

/// Measures `β_g` against its asymptotes at `r = 1e−3` (`1 + 1e−3` for the
/// elementary family) and `r = 1e3`. Logarithms are compared so that
/// overflowing values remain measurable.
pub fn asymptotics_report(g: &BernsteinFunction, n: f64, c0: f64) -> Result<AsymptoticsReport> {
    if !(n > 0.0 && c0 > 0.0) {
        return Err(Error::ParameterOutOfRange(format!("need n, c0 > 0, got ({n}, {c0})")));
    }
    let h = 0.5 * n;
    let lc = c0.ln();
    type Asym = (f64, String, Box<dyn Fn(f64) -> f64>);
    let (near, far): (Asym, Asym) = match g.family() {
        Family::Power { alpha } => (
            (
                1e-3,
                format!("c0 r^(-{n}/(2*{alpha}))"),
                Box::new(move |r: f64| lc - h / alpha * r.ln()),
            ),
            (
                1e3,
                format!("c0 r^(-{n}/(2*{alpha}))"),
                Box::new(move |r: f64| lc - h / alpha * r.ln()),
            ),
        ),
        Family::Log1p => (
            (1e-3, format!("c0 exp({n}/(2r))"), Box::new(move |r: f64| lc + h / r)),
            (1e3, format!("c0 r^(-{n}/2)"), Box::new(move |r: f64| lc - h * r.ln())),
        ),
        Family::LogPower { alpha, gamma } => (
            (
                1e-3,
                format!("c0 exp(({n}/(2*{alpha})) (1/r)^(1/{gamma}))"),
                Box::new(move |r: f64| lc + h / alpha * (1.0 / r).powf(1.0 / gamma)),
            ),
            (
                1e3,
                format!("c0 r^(-{n}/(2*{alpha}*{gamma}))"),
                Box::new(move |r: f64| lc - h / (alpha * gamma) * r.ln()),
            ),
        ),
        Family::Elementary { lambda } => (
            (
                1.0 + 1e-3,
                format!("(c0/{lambda}^({n}/2)) ln(1/(r-1))^({n}/2)"),
                Box::new(move |r: f64| lc - h * lambda.ln() + h * (1.0 / (r - 1.0)).ln().ln()),
            ),
            (
                1e3,
                format!("c0 (r {lambda})^(-{n}/2)"),
                Box::new(move |r: f64| lc - h * (r * lambda).ln()),
            ),
        ),
        Family::Affine { .. } => {
            return Err(Error::Precondition(format!(
                "no asymptotic family registered for `{}`",
                g.name()
            )))
        }
    };
    // ln β_g(r) = ln c0 + (n/2) ln g^{-1}(1/r)
    let measure = |(r, text, ln_asym): Asym| -> Result<AsymptoteCheck> {
        let ln_beta_g = lc + h * g.ln_inverse(1.0 / r)?;
        let ln_asymptote = ln_asym(r);
        Ok(AsymptoteCheck {
            r,
            asymptote: text,
            ln_beta_g,
            ln_asymptote,
            ratio: (ln_beta_g - ln_asymptote).exp(),
        })
    };
    Ok(AsymptoticsReport {
        g: g.name(),
        n,
        c0,
        limit_0: measure(near)?,
        limit_inf: measure(far)?,
    })
}
