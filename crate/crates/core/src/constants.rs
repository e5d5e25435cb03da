//! Euclidean constants for the Laplacian on `R^n` and its fractional powers.
//!
//! `N_n` is the sharp Nash constant of `R^n`; it is always supplied by the
//! caller.

use std::f64::consts::PI;

use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

/// `|S^{n−1}| = 2 π^{n/2} / Γ(n/2)`.
pub fn sphere_area(n: u32) -> f64 {
    let h = 0.5 * n as f64;
    2.0 * PI.powf(h) / gamma(h)
}

/// Volume of the unit ball, `ω_n = π^{n/2} / Γ(n/2 + 1)`.
pub fn ball_volume(n: u32) -> f64 {
    let h = 0.5 * n as f64;
    PI.powf(h) / gamma(h + 1.0)
}

/// Super-Poincaré constant `C_n = 2 (n N_n)^{n/2} / (n+2)^{1+n/2}`, so that
/// `β(r) = C_n r^{−n/2}`.
pub fn super_poincare_constant(n: u32, nash: f64) -> f64 {
    let n = n as f64;
    2.0 * (n * nash).powf(0.5 * n) / (n + 2.0).powf(1.0 + 0.5 * n)
}

/// `L_{n,α} = 2^{α−1} N_n^{−α} n (2α)^{2α/n} / (2α+n)^{1+2α/n}`.
pub fn lower_constant(n: u32, alpha: f64, nash: f64) -> f64 {
    let n = n as f64;
    let e = 2.0 * alpha / n;
    2f64.powf(alpha - 1.0) * nash.powf(-alpha) * n * (2.0 * alpha).powf(e) / (2.0 * alpha + n).powf(1.0 + e)
}

/// `K_{n,α} = (n/(n+2α)) 2^{α−1} ((n/(2α) + 1) C_n)^{−2α/n}`.
pub fn upper_constant(n: u32, alpha: f64, nash: f64) -> f64 {
    let c = super_poincare_constant(n, nash);
    let n = n as f64;
    (n / (n + 2.0 * alpha)) * 2f64.powf(alpha - 1.0) * ((n / (2.0 * alpha) + 1.0) * c).powf(-2.0 * alpha / n)
}

/// The `N_n`-free form of `L_{n,α} < K_{n,α}`: `n 2^{2/n} < (n+2)^{2/n+1}`.
pub fn reduction_holds(n: u32) -> bool {
    let n = n as f64;
    n * 2f64.powf(2.0 / n) < (n + 2.0).powf(2.0 / n + 1.0)
}

/// One row of the constants table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EuclideanConstants {
    pub n: u32,
    pub alpha: f64,
    pub nash_constant: f64,
    pub c_n: f64,
    pub l: f64,
    pub k: f64,
    pub l_lt_k: bool,
    pub reduction: bool,
}

impl EuclideanConstants {
    pub fn compute(n: u32, alpha: f64, nash: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::ParameterOutOfRange("dimension must be at least 1".into()));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::ParameterOutOfRange(format!("α = {alpha} not in (0, 1]")));
        }
        if !(nash > 0.0 && nash.is_finite()) {
            return Err(Error::ParameterOutOfRange(format!(
                "Nash constant {nash} must be positive"
            )));
        }
        let l = lower_constant(n, alpha, nash);
        let k = upper_constant(n, alpha, nash);
        Ok(Self {
            n,
            alpha,
            nash_constant: nash,
            c_n: super_poincare_constant(n, nash),
            l,
            k,
            l_lt_k: l < k,
            reduction: reduction_holds(n),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_and_ball() {
        assert!((sphere_area(1) - 2.0).abs() < 1e-14);
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-13);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
        assert!((ball_volume(2) - PI).abs() < 1e-13);
        assert!((ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-13);
        for n in 1..10 {
            // |S^{n-1}| = n ω_n
            assert!((sphere_area(n) - n as f64 * ball_volume(n)).abs() < 1e-12);
        }
    }

    #[test]
    fn ratio_is_nash_free() {
        for n in 1..=20 {
            for i in 1..=9 {
                let alpha = i as f64 / 10.0;
                let a = upper_constant(n, alpha, 0.7) / lower_constant(n, alpha, 0.7);
                let b = upper_constant(n, alpha, 13.0) / lower_constant(n, alpha, 13.0);
                let nf = n as f64;
                let closed = ((nf + 2.0).powf(2.0 / nf + 1.0) / (nf * 2f64.powf(2.0 / nf))).powf(alpha);
                assert!((a - closed).abs() < 1e-10 * closed);
                assert!((b - closed).abs() < 1e-10 * closed);
            }
        }
    }

    #[test]
    fn c2_is_quarter_nash() {
        assert!((super_poincare_constant(2, 3.0) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_ranges() {
        assert!(EuclideanConstants::compute(0, 0.5, 1.0).is_err());
        assert!(EuclideanConstants::compute(2, 1.5, 1.0).is_err());
        assert!(EuclideanConstants::compute(2, 0.5, -1.0).is_err());
    }
}
