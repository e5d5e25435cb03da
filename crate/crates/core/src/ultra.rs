//! Ultracontractivity from Nash rates, and `1 → 2` norms of `e^{−t g(Δ)}`
//! on `ℝⁿ`.
//!
//! Convergence of every improper integral here is decided from a registered
//! [`Growth`], never from the numerical value of the integral.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::bernstein::BernsteinFunction;
use crate::constants::sphere_area;
use crate::error::{Error, Result};
use crate::growth::Growth;
use crate::legendre::{NashFunction, RateFunction, RealFn};
use crate::quad::{self, Tail, Tolerance};

/// A Nash rate `Θ` with its growth at infinity.
#[derive(Clone)]
pub struct Theta {
    label: String,
    f: RealFn,
    growth: Growth,
}

impl fmt::Debug for Theta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Theta({}, {:?})", self.label, self.growth)
    }
}

impl Theta {
    pub fn new<F>(label: impl Into<String>, growth: Growth, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            f: Arc::new(f),
            growth,
        }
    }

    /// `c x^q`.
    pub fn power(c: f64, q: f64) -> Self {
        Self::new(format!("{c}*x^{q}"), Growth::power(c, q), move |x: f64| c * x.powf(q))
    }

    /// `x D(x)`. Fails when `D` has no registered growth.
    pub fn from_nash(d: &NashFunction) -> Result<Self> {
        let growth = d
            .growth()
            .ok_or_else(|| Error::Precondition(format!("Nash function `{}` has no registered growth", d.label())))?;
        let d2 = d.clone();
        Ok(Self::new(
            format!("x*{}", d.label()),
            growth.times_power(1.0),
            move |x| x * d2.eval(x),
        ))
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn growth(&self) -> Growth {
        self.growth
    }
}

/// Spacing of the cached `F` table in `ln s`.
const NODE_STEP: f64 = 1.0;
/// The table covers `ln s ∈ [ln s_min, max(ln s_min, 0) + TABLE_SPAN]`.
const TABLE_SPAN: f64 = 40.0;

fn tol() -> Tolerance {
    Tolerance {
        abs: 1e-300,
        rel: 1e-13,
        max_intervals: 4000,
    }
}

/// `F(s) = ∫_s^∞ dx/Θ(x)` tabulated on a log grid, and its inverse `a(t)`.
#[derive(Debug, Clone)]
pub struct UltraBound {
    theta: Theta,
    s_min: f64,
    y0: f64,
    /// `F(e^{y0 + i·NODE_STEP})`, strictly decreasing.
    table: Vec<f64>,
    tail: Tail,
}

/// `e^y / Θ(e^y)`, the integrand of `F` in `y = ln x`.
fn integrand(theta: &Theta, y: f64) -> f64 {
    let x = y.exp();
    let v = theta.eval(x);
    if v == f64::INFINITY {
        0.0
    } else {
        x / v
    }
}

/// Builds `F` and `a` for `Θ` on `[s_min, ∞)`.
pub fn coulhon_bound(theta: &Theta, s_min: f64) -> Result<UltraBound> {
    if !(s_min > 0.0 && s_min.is_finite()) {
        return Err(Error::ParameterOutOfRange(format!("s_min = {s_min} must be positive")));
    }
    let g = theta.growth();
    if !g.reciprocal_integrable() {
        return Err(Error::NotUltracontractive(format!(
            "∫^∞ dx/Θ(x) diverges for `{}` (growth x^{} (ln x)^{})",
            theta.label(),
            g.power,
            g.log_power
        )));
    }
    // In y = ln x the integrand behaves like e^{(1−p)y} y^{−b}.
    let tail = if g.power > 1.0 {
        Tail::Rapid
    } else {
        Tail::Power(g.log_power)
    };
    let y0 = s_min.ln();
    let y_top = y0.max(0.0) + TABLE_SPAN;
    let count = ((y_top - y0) / NODE_STEP).ceil() as usize;
    let ys: Vec<f64> = (0..=count).map(|i| y0 + i as f64 * NODE_STEP).collect();

    let mut last = 0.0f64;
    for &y in &ys {
        for z in [y, y + 0.5 * NODE_STEP] {
            let v = theta.eval(z.exp());
            if !(v > 0.0) {
                return Err(Error::NotUltracontractive(format!(
                    "Θ({}) = {v} is not positive for `{}`",
                    z.exp(),
                    theta.label()
                )));
            }
            if v < last * (1.0 - 1e-9) {
                return Err(Error::Precondition(format!(
                    "Θ = `{}` decreases near {}",
                    theta.label(),
                    z.exp()
                )));
            }
            last = v;
        }
    }

    let top = *ys.last().expect("non-empty");
    let mut table = vec![0.0; ys.len()];
    table[ys.len() - 1] = tail_from(theta, top, tail)?;
    for i in (0..ys.len() - 1).rev() {
        let piece = quad::adaptive(|y| integrand(theta, y), ys[i], ys[i + 1], tol())?;
        table[i] = table[i + 1] + piece.value;
    }
    Ok(UltraBound {
        theta: theta.clone(),
        s_min,
        y0,
        table,
        tail,
    })
}

fn tail_from(theta: &Theta, y: f64, tail: Tail) -> Result<f64> {
    // quad::tail needs a positive lower limit.
    let start = y.max(1.0);
    let head = quad::adaptive(|z| integrand(theta, z), y, start, tol())?;
    let rest = quad::tail(|z| integrand(theta, z), start, tail, tol())?;
    Ok(head.value + rest.value)
}

/// [`coulhon_bound`] with `Θ(x) = x D(x)`.
pub fn ultra_from_nash(d: &NashFunction, s_min: f64) -> Result<UltraBound> {
    // A transferred D carries the growth of its upper bound g∘D. That
    // certifies divergence; convergence follows because the sandwich lower
    // bound has the same order.
    coulhon_bound(&Theta::from_nash(d)?, s_min)
}

impl UltraBound {
    pub fn theta(&self) -> &Theta {
        &self.theta
    }

    pub fn s_min(&self) -> f64 {
        self.s_min
    }

    /// `F(s_min)`: `a` is defined on `(0, t_max)`.
    pub fn t_max(&self) -> f64 {
        self.table[0]
    }

    fn f_log(&self, y: f64) -> Result<f64> {
        let last = self.table.len() - 1;
        let top = self.y0 + last as f64 * NODE_STEP;
        if y >= top {
            return tail_from(&self.theta, y, self.tail);
        }
        let i = (((y - self.y0) / NODE_STEP).floor().max(0.0) as usize).min(last - 1);
        let node = self.y0 + (i + 1) as f64 * NODE_STEP;
        let piece = quad::adaptive(|z| integrand(&self.theta, z), y, node, tol())?;
        Ok(self.table[i + 1] + piece.value)
    }

    /// `F(s) = ∫_s^∞ dx/Θ(x)` for `s ≥ s_min`.
    pub fn f_eval(&self, s: f64) -> Result<f64> {
        if !(s >= self.s_min) {
            return Err(Error::Domain {
                value: s,
                lo: self.s_min,
                hi: f64::INFINITY,
            });
        }
        if s == f64::INFINITY {
            return Ok(0.0);
        }
        self.f_log(s.ln())
    }

    /// `a(t) = F⁻¹(t)` for `0 < t < F(s_min)`.
    pub fn a_eval(&self, t: f64) -> Result<f64> {
        if !(t > 0.0 && t < self.t_max()) {
            return Err(Error::Domain {
                value: t,
                lo: 0.0,
                hi: self.t_max(),
            });
        }
        // Bracket [lo, hi] in y with F(lo) ≥ t > F(hi).
        let (mut lo, mut hi);
        match self.table.iter().position(|&v| v < t) {
            Some(i) => {
                lo = self.y0 + (i - 1) as f64 * NODE_STEP;
                hi = self.y0 + i as f64 * NODE_STEP;
            }
            None => {
                let mut step = NODE_STEP;
                lo = self.y0 + (self.table.len() - 1) as f64 * NODE_STEP;
                hi = lo + step;
                while self.f_log(hi)? >= t {
                    lo = hi;
                    step *= 2.0;
                    hi += step;
                    if hi > 700.0 {
                        return Err(Error::InversionFailed(format!("a({t}) exceeds the f64 range")));
                    }
                }
            }
        }
        // Safeguarded Newton in y: dF/dy = −e^y/Θ(e^y).
        let mut y = 0.5 * (lo + hi);
        for _ in 0..200 {
            let fy = self.f_log(y)? - t;
            if fy.abs() <= 1e-15 * t {
                break;
            }
            if fy > 0.0 {
                lo = y;
            } else {
                hi = y;
            }
            let slope = -integrand(&self.theta, y);
            let newton = y - fy / slope;
            y = if slope < 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo <= 1e-15 * hi.abs().max(1.0) {
                break;
            }
        }
        Ok(y.exp())
    }
}

/// Integrability of `e^{−2t g(r²)} r^{n−1}` at infinity, from the growth of `g`.
pub fn heat_tail(g: &BernsteinFunction, n: u32, t: f64) -> Option<Tail> {
    let gr = g.growth();
    let n = n as f64;
    if gr.power > 0.0 || gr.log_power > 1.0 {
        Some(Tail::Rapid)
    } else if gr.log_power == 1.0 {
        // g(r²) ~ 2c ln r, so the integrand is r^{n−1−4tc}.
        let p = 4.0 * t * gr.coeff - n + 1.0;
        (p > 1.0).then_some(Tail::Power(p))
    } else {
        None
    }
}

/// `‖e^{−t g(Δ)}‖²_{1→2} = (2π)^{−n} |S^{n−1}| ∫_0^∞ e^{−2t g(r²)} r^{n−1} dr`,
/// `+∞` when the tail test fails.
pub fn norm_1_to_2_squared(g: &BernsteinFunction, n: u32, t: f64) -> Result<f64> {
    if n == 0 || !(t > 0.0) {
        return Err(Error::ParameterOutOfRange(format!(
            "need n ≥ 1 and t > 0, got n = {n}, t = {t}"
        )));
    }
    let Some(tail) = heat_tail(g, n, t) else {
        return Ok(f64::INFINITY);
    };
    let k = n as i32 - 1;
    let integrand = |r: f64| {
        let e = (-2.0 * t * g.eval(r * r)).exp();
        if e == 0.0 {
            0.0
        } else {
            e * r.powi(k)
        }
    };
    // Put the split where the integrand has mostly decayed.
    let scale = g.generalized_inverse(1.0 / t).sqrt();
    let scale = if scale.is_finite() && scale > 0.0 { scale } else { 1.0 };
    let near = quad::adaptive(integrand, 0.0, scale, tol())?;
    let far = quad::tail(integrand, scale, tail, tol())?;
    let radial = near.value + far.value;
    Ok(sphere_area(n) * radial / (2.0 * std::f64::consts::PI).powi(n as i32))
}

/// `‖e^{−t g(Δ)}‖_{1→2}`, possibly `+∞`.
pub fn norm_1_to_2_g_laplacian(g: &BernsteinFunction, n: u32, t: f64) -> Result<f64> {
    Ok(norm_1_to_2_squared(g, n, t)?.sqrt())
}

/// `β(r) = b(r/2)²`.
pub fn super_poincare_from_ultra<F>(label: impl Into<String>, b: F) -> RateFunction
where
    F: Fn(f64) -> f64 + Send + Sync + 'static,
{
    RateFunction::new(label, 0.0, f64::INFINITY, move |r| b(0.5 * r).powi(2)).with_monotone_hint(true)
}

/// One row of an ultracontractivity table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UltraRow {
    pub t: f64,
    pub a: f64,
}

impl UltraBound {
    /// `(t, a(t))` for each `t` in the domain of `a`; other `t` are skipped.
    pub fn table(&self, ts: &[f64]) -> Result<Vec<UltraRow>> {
        let mut rows = Vec::with_capacity(ts.len());
        for &t in ts {
            if t > 0.0 && t < self.t_max() {
                rows.push(UltraRow { t, a: self.a_eval(t)? });
            }
        }
        Ok(rows)
    }
}
