//! Rate functions, Nash functions and the conjugation between them.
//!
//! With `h(t) = t β(1/t)` the Nash function is `x D(x) = h*(x)`, so
//! `D(x) = sup_t (t − t β(1/t)/x)` and `β(r) = sup_x (x − r x D(x))`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::bernstein::parse_params;
use crate::constants::super_poincare_constant;
use crate::error::{Error, Result};
use crate::growth::Growth;
use crate::optimize::{log_space, sup_log, LogGrid};

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A super-Poincaré rate `β` on an open interval `(lo, hi)`; `+∞` outside.
#[derive(Clone)]
pub struct RateFunction {
    f: RealFn,
    lo: f64,
    hi: f64,
    monotone_hint: bool,
    label: String,
}

impl fmt::Debug for RateFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RateFunction")
            .field("label", &self.label)
            .field("domain", &(self.lo, self.hi))
            .finish()
    }
}

impl RateFunction {
    pub fn new<F>(label: impl Into<String>, lo: f64, hi: f64, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            f: Arc::new(f),
            lo,
            hi,
            monotone_hint: true,
            label: label.into(),
        }
    }

    pub fn with_monotone_hint(mut self, hint: bool) -> Self {
        self.monotone_hint = hint;
        self
    }

    pub fn relabel(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn eval(&self, r: f64) -> f64 {
        if r > self.lo && r < self.hi {
            (self.f)(r)
        } else {
            f64::INFINITY
        }
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn contains(&self, r: f64) -> bool {
        r > self.lo && r < self.hi
    }

    pub fn monotone_hint(&self) -> bool {
        self.monotone_hint
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `c · β` on the same domain.
    pub fn scaled(&self, c: f64) -> Self {
        let inner = self.clone();
        Self {
            f: Arc::new(move |r| c * inner.eval(r)),
            label: format!("{c}*{}", self.label),
            ..self.clone()
        }
    }

    /// `β` restricted to `(lo, hi) ∩ domain`.
    pub fn restricted(&self, lo: f64, hi: f64) -> Self {
        Self {
            lo: self.lo.max(lo),
            hi: self.hi.min(hi),
            ..self.clone()
        }
    }

    /// Non-increasing on the given increasing grid, up to relative `tol`.
    pub fn is_non_increasing_on(&self, grid: &[f64], tol: f64) -> bool {
        grid.windows(2).all(|w| {
            let (a, b) = (self.eval(w[0]), self.eval(w[1]));
            b <= a || b <= a + tol * a.abs().max(b.abs())
        })
    }
}

/// Rate catalog:
/// `power:n,c0` is `c0 r^{−n/2}`; `euclid:n,N` is `C_n r^{−n/2}`;
/// `ou` is the Ornstein–Uhlenbeck rate; `riemann:c,λ` is `e^{c(1 + r^{−λ})}`;
/// `const:c` is constant.
impl FromStr for RateFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let p = parse_params(s, rest)?;
        let arity = |n: usize| {
            if p.len() == n {
                Ok(())
            } else {
                Err(Error::ParameterOutOfRange(format!(
                    "`{name}` takes {n} parameter(s), got {}",
                    p.len()
                )))
            }
        };
        let positive = |v: f64, what: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(Error::ParameterOutOfRange(format!("{what} = {v} must be positive")))
            }
        };
        let rate = match name {
            "power" => {
                arity(2)?;
                power_law(positive(p[0], "dimension")?, positive(p[1], "c0")?)
            }
            "euclid" => {
                arity(2)?;
                let n = positive(p[0], "dimension")?;
                if n.fract() != 0.0 {
                    return Err(Error::ParameterOutOfRange(format!("dimension {n} must be an integer")));
                }
                let c = super_poincare_constant(n as u32, positive(p[1], "Nash constant")?);
                power_law(n, c)
            }
            "ou" => {
                arity(0)?;
                ornstein_uhlenbeck()
            }
            "riemann" => {
                arity(2)?;
                let c = positive(p[0], "c")?;
                let l = positive(p[1], "λ")?;
                RateFunction::new(s, 0.0, f64::INFINITY, move |r: f64| (c * (1.0 + r.powf(-l))).exp())
            }
            "const" => {
                arity(1)?;
                let c = positive(p[0], "c")?;
                RateFunction::new(s, 0.0, f64::INFINITY, move |_| c)
            }
            other => return Err(Error::UnknownFamily(other.to_string())),
        };
        Ok(rate.relabel(s))
    }
}

/// `c0 r^{−n/2}` on `(0, ∞)`.
pub fn power_law(n: f64, c0: f64) -> RateFunction {
    let e = 0.5 * n;
    RateFunction::new(format!("power:{n},{c0}"), 0.0, f64::INFINITY, move |r: f64| {
        c0 * r.powf(-e)
    })
}

/// `(t/(2e)) e^{2/t}` for `t ≤ 1` and `1` for `t ≥ 1`.
pub fn ornstein_uhlenbeck() -> RateFunction {
    RateFunction::new("ou", 0.0, f64::INFINITY, |t: f64| {
        if t <= 1.0 {
            t / (2.0 * std::f64::consts::E) * (2.0 / t).exp()
        } else {
            1.0
        }
    })
}

/// A Nash function `D` on `(0, x_max)`; `+∞` from `x_max` on.
#[derive(Clone)]
pub struct NashFunction {
    f: RealFn,
    x_max: f64,
    growth: Option<Growth>,
    label: String,
}

impl fmt::Debug for NashFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NashFunction")
            .field("label", &self.label)
            .field("x_max", &self.x_max)
            .field("growth", &self.growth)
            .finish()
    }
}

impl NashFunction {
    pub fn new<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            f: Arc::new(f),
            x_max: f64::INFINITY,
            growth: None,
            label: label.into(),
        }
    }

    pub fn with_growth(mut self, growth: Growth) -> Self {
        self.growth = Some(growth);
        self
    }

    pub fn with_x_max(mut self, x_max: f64) -> Self {
        self.x_max = x_max;
        self
    }

    pub fn relabel(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// `D(x)`; `0` for `x ≤ 0`, `+∞` for `x ≥ x_max`.
    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else if x >= self.x_max {
            f64::INFINITY
        } else {
            (self.f)(x)
        }
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    /// Registered growth at infinity, when known analytically.
    pub fn growth(&self) -> Option<Growth> {
        self.growth
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_non_decreasing_on(&self, grid: &[f64], tol: f64) -> bool {
        grid.windows(2).all(|w| {
            let (a, b) = (self.eval(w[0]), self.eval(w[1]));
            b >= a || b >= a - tol * a.abs().max(b.abs())
        })
    }

    /// `x ↦ x D(x)` convex on the grid, up to relative `tol`.
    pub fn x_times_convex_on(&self, grid: &[f64], tol: f64) -> bool {
        let h: Vec<f64> = grid.iter().map(|&x| x * self.eval(x)).collect();
        (0..grid.len().saturating_sub(2)).all(|i| convex_triple(&grid[i..i + 3], &h[i..i + 3], tol))
    }
}

fn convex_triple(x: &[f64], y: &[f64], tol: f64) -> bool {
    if y.iter().any(|v| !v.is_finite()) {
        return true;
    }
    let s0 = (y[1] - y[0]) / (x[1] - x[0]);
    let s1 = (y[2] - y[1]) / (x[2] - x[1]);
    let scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs())) / (x[1] - x[0]).min(x[2] - x[1]);
    s1 >= s0 - tol * scale
}

/// Convex on the grid (second divided differences non-negative up to `tol`).
pub fn is_convex_on<F: Fn(f64) -> f64>(f: F, grid: &[f64], tol: f64) -> bool {
    let y: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    (0..grid.len().saturating_sub(2)).all(|i| convex_triple(&grid[i..i + 3], &y[i..i + 3], tol))
}

/// Nash catalog: `power:c,p` is `c x^p`; `euclid:n,N` is `x^{2/n}/N`;
/// `zero`; `step:x0` is `0` up to `x0` and `+∞` beyond.
impl FromStr for NashFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let p = parse_params(s, rest)?;
        let arity = |n: usize| {
            if p.len() == n {
                Ok(())
            } else {
                Err(Error::ParameterOutOfRange(format!(
                    "`{name}` takes {n} parameter(s), got {}",
                    p.len()
                )))
            }
        };
        let d = match name {
            "power" => {
                arity(2)?;
                if !(p[0] > 0.0 && p[1] > 0.0) {
                    return Err(Error::ParameterOutOfRange(format!(
                        "power Nash function needs c, p > 0 in `{s}`"
                    )));
                }
                power_nash(p[0], p[1])
            }
            "euclid" => {
                arity(2)?;
                if !(p[0] >= 1.0 && p[1] > 0.0) {
                    return Err(Error::ParameterOutOfRange(format!("`{s}` needs n ≥ 1 and N > 0")));
                }
                power_nash(1.0 / p[1], 2.0 / p[0])
            }
            "zero" => {
                arity(0)?;
                NashFunction::new("zero", |_| 0.0).with_growth(Growth::bounded(0.0))
            }
            "step" => {
                arity(1)?;
                let x0 = p[0];
                if !(x0 > 0.0) {
                    return Err(Error::ParameterOutOfRange(format!(
                        "step location {x0} must be positive"
                    )));
                }
                NashFunction::new(s, |_| 0.0).with_x_max(x0.next_up())
            }
            other => return Err(Error::UnknownFamily(other.to_string())),
        };
        Ok(d.relabel(s))
    }
}

/// `c x^p`.
pub fn power_nash(c: f64, p: f64) -> NashFunction {
    NashFunction::new(format!("power:{c},{p}"), move |x: f64| c * x.powf(p)).with_growth(Growth::power(c, p))
}

/// `D(x) = max(0, sup_{t>0} (t − t β(1/t)/x))`.
///
/// Requires `t β(1/t) → 0` as `t → 0⁺`. Where the supremum is unbounded the
/// value is `+∞`.
pub fn beta_to_nash(beta: &RateFunction) -> Result<NashFunction> {
    let h = |t: f64| t * beta.eval(1.0 / t);
    let (h6, h9, h12) = (h(1e-6), h(1e-9), h(1e-12));
    let scale = h(1.0).abs().max(1.0);
    if !(h12.is_finite()
        && h12 <= 1e-6 * scale
        && h12 <= h9 * (1.0 + 1e-9) + 1e-300
        && h9 <= h6 * (1.0 + 1e-9) + 1e-300)
    {
        return Err(Error::Precondition(format!(
            "t β(1/t) does not vanish as t → 0 for `{}`",
            beta.label()
        )));
    }
    let b = beta.clone();
    Ok(NashFunction::new(format!("nash({})", beta.label()), move |x: f64| {
        let s = sup_log(|t| t - t * b.eval(1.0 / t) / x, &LogGrid::default());
        if s.diverged {
            f64::INFINITY
        } else {
            s.value.max(0.0)
        }
    }))
}

/// `β(r) = sup_{x>0} (x − r x D(x))`, `+∞` where the supremum is unbounded
/// (bounded `D`). `D` must be non-negative and non-decreasing.
pub fn nash_to_beta(d: &NashFunction) -> Result<RateFunction> {
    let grid = log_space(1e-8, 1e8, 161);
    if grid.iter().any(|&x| !(d.eval(x) >= 0.0)) {
        return Err(Error::Precondition(format!("`{}` takes negative values", d.label())));
    }
    if !d.is_non_decreasing_on(&grid, 1e-9) {
        return Err(Error::Precondition(format!("`{}` is not non-decreasing", d.label())));
    }
    let d = d.clone();
    Ok(RateFunction::new(
        format!("rate({})", d.label()),
        0.0,
        f64::INFINITY,
        move |r: f64| {
            let s = sup_log(|x| x - r * x * d.eval(x), &LogGrid::default());
            if s.diverged {
                f64::INFINITY
            } else {
                s.value
            }
        },
    ))
}

/// `h*(x) = sup_{t>0} (t x − h(t))` by the log-grid sup engine.
pub fn conjugate<H: Fn(f64) -> f64>(h: H, x: f64) -> f64 {
    let s = sup_log(|t| t * x - h(t), &LogGrid::default());
    if s.diverged {
        f64::INFINITY
    } else {
        s.value.max(0.0)
    }
}

/// A Young pair `(h, h*)`.
#[derive(Clone)]
pub struct NFunctionPair {
    pub name: String,
    pub h: RealFn,
    pub h_star: RealFn,
    /// `h*` has a closed form (otherwise it is a numerical supremum).
    pub closed_form: bool,
}

impl fmt::Debug for NFunctionPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NFunctionPair").field("name", &self.name).finish()
    }
}

impl NFunctionPair {
    pub fn h(&self, t: f64) -> f64 {
        (self.h)(t)
    }

    pub fn h_star(&self, x: f64) -> f64 {
        (self.h_star)(x)
    }

    /// `h*(x) − (t x − h(t))`, non-negative by Young's inequality.
    pub fn young_gap(&self, t: f64, x: f64) -> f64 {
        self.h_star(x) + self.h(t) - t * x
    }
}

/// `h1:p`, `h2`, `h3`, `h4:p` (`p > 1` for the parametric members).
pub fn nfunction_catalog(id: &str) -> Result<NFunctionPair> {
    let id = id.trim();
    let (name, rest) = id.split_once(':').unwrap_or((id, ""));
    let p = parse_params(id, rest)?;
    let exponent = || -> Result<f64> {
        match p.as_slice() {
            [p] if *p > 1.0 && p.is_finite() => Ok(*p),
            [p] => Err(Error::ParameterOutOfRange(format!("`{name}` needs p > 1, got {p}"))),
            _ => Err(Error::ParameterOutOfRange(format!("`{name}` takes one parameter"))),
        }
    };
    let no_params = || {
        if p.is_empty() {
            Ok(())
        } else {
            Err(Error::ParameterOutOfRange(format!("`{name}` takes no parameters")))
        }
    };
    let pair = |h: RealFn, h_star: RealFn, closed_form: bool| NFunctionPair {
        name: id.to_string(),
        h,
        h_star,
        closed_form,
    };
    Ok(match name {
        "h1" => {
            let p = exponent()?;
            let q = p / (p - 1.0);
            pair(
                Arc::new(move |t: f64| t.powf(p) / p),
                Arc::new(move |x: f64| x.powf(q) / q),
                true,
            )
        }
        "h2" => {
            no_params()?;
            pair(
                Arc::new(|t: f64| t.exp_m1() - t),
                Arc::new(|x: f64| (1.0 + x) * x.ln_1p() - x),
                true,
            )
        }
        "h3" => {
            no_params()?;
            pair(
                Arc::new(|t: f64| (1.0 + t) * t.ln_1p() - t),
                Arc::new(|x: f64| x.exp_m1() - x),
                true,
            )
        }
        "h4" => {
            let p = exponent()?;
            let h = move |t: f64| t.powf(p).exp_m1();
            pair(Arc::new(h), Arc::new(move |x: f64| conjugate(h, x)), false)
        }
        other => return Err(Error::UnknownFamily(other.to_string())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(f64::MIN_POSITIVE)
    }

    /// `sup_t (t − C t^{1+ν}/x)` in closed form.
    fn power_conjugate(c: f64, nu: f64, x: f64) -> f64 {
        let t = (x / (c * (nu + 1.0))).powf(1.0 / nu);
        t - c * t.powf(1.0 + nu) / x
    }

    #[test]
    fn euclid_n2_gives_linear_nash() {
        let nash = 3.0;
        let beta: RateFunction = format!("euclid:2,{nash}").parse().unwrap();
        let d = beta_to_nash(&beta).unwrap();
        for x in [1e-3, 0.1, 1.0, 10.0, 1e3] {
            assert!(close(d.eval(x), x / nash, 1e-6), "x={x}: {}", d.eval(x));
        }
    }

    #[test]
    fn closed_form_conjugate_in_several_dimensions() {
        for n in 1..=4 {
            let c = 0.8;
            let beta = power_law(n as f64, c);
            let d = beta_to_nash(&beta).unwrap();
            for x in log_space(1e-2, 1e2, 9) {
                let want = power_conjugate(c, 0.5 * n as f64, x);
                assert!(close(d.eval(x), want, 1e-6), "n={n} x={x}");
            }
        }
    }

    #[test]
    fn constant_rate_diverges_above_level() {
        let beta: RateFunction = "const:2".parse().unwrap();
        let d = beta_to_nash(&beta).unwrap();
        assert_eq!(d.eval(3.0), f64::INFINITY);
        assert_eq!(d.eval(1.0), 0.0);
    }

    #[test]
    fn reciprocal_rate_gives_quarter() {
        let beta = power_law(2.0, 1.0);
        let d = beta_to_nash(&beta).unwrap();
        for x in [0.5, 4.0, 100.0] {
            assert!(close(d.eval(x), x / 4.0, 1e-10));
        }
    }

    #[test]
    fn nash_to_beta_examples() {
        let nash = 2.0;
        let d: NashFunction = format!("euclid:2,{nash}").parse().unwrap();
        let beta = nash_to_beta(&d).unwrap();
        for r in [0.01, 1.0, 100.0] {
            assert!(close(beta.eval(r), nash / (4.0 * r), 1e-10));
        }
        let step: NashFunction = "step:1".parse().unwrap();
        let beta = nash_to_beta(&step).unwrap();
        for r in [0.01, 1.0, 100.0] {
            assert!(close(beta.eval(r), 1.0, 1e-10), "{}", beta.eval(r));
        }
        let bounded = NashFunction::new("bounded", |x: f64| x / (1.0 + x));
        let beta = nash_to_beta(&bounded).unwrap();
        assert_eq!(beta.eval(0.5), f64::INFINITY);
        assert!(beta.eval(2.0).is_finite());
    }

    #[test]
    fn nash_to_beta_rejects_decreasing() {
        let d = NashFunction::new("dec", |x: f64| 1.0 / x);
        assert!(matches!(nash_to_beta(&d), Err(Error::Precondition(_))));
    }

    #[test]
    fn beta_to_nash_rejects_heavy_h() {
        let beta = RateFunction::new("bad", 0.0, f64::INFINITY, |r: f64| r * r);
        assert!(matches!(beta_to_nash(&beta), Err(Error::Precondition(_))));
    }

    #[test]
    fn round_trip_power_law() {
        for n in 1..=4 {
            let beta = power_law(n as f64, 1.3);
            let back = nash_to_beta(&beta_to_nash(&beta).unwrap()).unwrap();
            for r in log_space(1e-2, 1e2, 7) {
                assert!(close(back.eval(r), beta.eval(r), 1e-4), "n={n} r={r}");
            }
        }
    }

    #[test]
    fn conjugates_have_expected_shape() {
        let grid = log_space(1e-2, 1e2, 60);
        let beta = power_law(3.0, 0.5);
        let d = beta_to_nash(&beta).unwrap();
        assert!(d.is_non_decreasing_on(&grid, 1e-9));
        assert!(d.x_times_convex_on(&grid, 1e-7));
        let d2: NashFunction = "power:1,0.7".parse().unwrap();
        let b2 = nash_to_beta(&d2).unwrap();
        assert!(b2.is_non_increasing_on(&grid, 1e-9));
        assert!(is_convex_on(|r| b2.eval(r), &grid, 1e-7));
        assert!(grid.iter().all(|&r| b2.eval(r) >= 0.0));
    }

    #[test]
    fn catalog_rates() {
        let ou = ornstein_uhlenbeck();
        assert!(close(ou.eval(1.0), std::f64::consts::E / 2.0, 1e-15));
        assert_eq!(ou.eval(3.0), 1.0);
        let r: RateFunction = "riemann:1,2".parse().unwrap();
        assert!(close(r.eval(1.0), 2f64.exp(), 1e-15));
        assert_eq!(r.eval(-1.0), f64::INFINITY);
        assert!("nope:1".parse::<RateFunction>().is_err());
        assert!("power:2".parse::<RateFunction>().is_err());
        assert!("euclid:2.5,1".parse::<RateFunction>().is_err());
    }

    #[test]
    fn nfunction_examples() {
        let h1 = nfunction_catalog("h1:2").unwrap();
        assert!(close(h1.h_star(3.0), 4.5, 1e-15));
        let h2 = nfunction_catalog("h2").unwrap();
        assert!(close(h2.h_star(std::f64::consts::E - 1.0), 1.0, 1e-15));
        assert!(nfunction_catalog("h1:1").is_err());
        assert!(nfunction_catalog("h4:0.5").is_err());
        assert!(nfunction_catalog("h5").is_err());
    }

    #[test]
    fn young_inequality_on_grid() {
        for id in ["h1:1.5", "h1:3", "h2", "h3", "h4:2"] {
            let pair = nfunction_catalog(id).unwrap();
            for t in log_space(1e-3, 5.0, 30) {
                for x in log_space(1e-3, 50.0, 30) {
                    let gap = pair.young_gap(t, x);
                    assert!(gap >= -1e-12 * (t * x).max(1.0), "{id} t={t} x={x} gap={gap}");
                }
            }
        }
    }

    #[test]
    fn double_conjugation() {
        for id in ["h1:1.5", "h1:3", "h2", "h3"] {
            let pair = nfunction_catalog(id).unwrap();
            for t in log_space(1e-2, 3.0, 12) {
                let back = conjugate(|x| pair.h_star(x), t);
                assert!(close(back, pair.h(t), 1e-8), "{id} t={t}");
            }
        }
    }

    #[test]
    fn h4_star_small_x() {
        for p in [1.5f64, 2.0, 3.0] {
            let pair = nfunction_catalog(&format!("h4:{p}")).unwrap();
            let q = p / (p - 1.0);
            let cq = (p - 1.0) * (1.0 / p).powf(q);
            let x: f64 = 1e-6;
            assert!(close(pair.h_star(x), cq * x.powf(q), 1e-3), "p={p}");
        }
    }
}
