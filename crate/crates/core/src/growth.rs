/// Asymptotic growth `f(x) ~ coeff · x^power · (ln x)^log_power` as `x → ∞`.
///
/// This is the registered tail description used to decide convergence of
/// improper integrals analytically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Growth {
    pub coeff: f64,
    pub power: f64,
    pub log_power: f64,
}

impl Growth {
    pub fn power(coeff: f64, power: f64) -> Self {
        Self {
            coeff,
            power,
            log_power: 0.0,
        }
    }

    pub fn bounded(limit: f64) -> Self {
        Self::power(limit, 0.0)
    }

    pub fn is_bounded(&self) -> bool {
        self.power == 0.0 && self.log_power == 0.0
    }

    /// Growth of `x ↦ x^k · f(x)`.
    pub fn times_power(self, k: f64) -> Self {
        Self {
            power: self.power + k,
            ..self
        }
    }

    /// Growth of `outer ∘ self`, for an eventually increasing outer function.
    pub fn compose(outer: Growth, inner: Growth) -> Self {
        if inner.power <= 0.0 && inner.log_power <= 0.0 {
            // Inner bounded: the composition is bounded too.
            return Growth::bounded(f64::NAN);
        }
        if outer.power > 0.0 {
            let log_factor = if inner.power > 0.0 { inner.power } else { 1.0 };
            Growth {
                coeff: outer.coeff * inner.coeff.powf(outer.power) * log_factor.powf(outer.log_power),
                power: inner.power * outer.power,
                log_power: inner.log_power * outer.power + outer.log_power,
            }
        } else if outer.log_power > 0.0 {
            if inner.power > 0.0 {
                Growth {
                    coeff: outer.coeff * inner.power.powf(outer.log_power),
                    power: 0.0,
                    log_power: outer.log_power,
                }
            } else {
                // (ln ln x)^b: slower than any positive log power.
                Growth {
                    coeff: outer.coeff,
                    power: 0.0,
                    log_power: f64::MIN_POSITIVE,
                }
            }
        } else {
            outer
        }
    }

    /// Whether `∫^∞ dx / f(x)` converges for `f` with this growth.
    pub fn reciprocal_integrable(&self) -> bool {
        self.power > 1.0 || (self.power == 1.0 && self.log_power > 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nash_tails() {
        // x · c x^{2/n} converges, x · ln(1 + c x^{2/n}) does not.
        let d = Growth::power(1.0, 0.5);
        assert!(d.times_power(1.0).reciprocal_integrable());
        let log1p = Growth {
            coeff: 1.0,
            power: 0.0,
            log_power: 1.0,
        };
        let composed = Growth::compose(log1p, d).times_power(1.0);
        assert_eq!(composed.power, 1.0);
        assert_eq!(composed.log_power, 1.0);
        assert!(!composed.reciprocal_integrable());
        let sqrt = Growth::power(1.0, 0.5);
        let frac = Growth::compose(sqrt, Growth::power(1.0, 2.0)).times_power(1.0);
        assert_eq!(frac.power, 2.0);
        assert!(frac.reciprocal_integrable());
    }
}
