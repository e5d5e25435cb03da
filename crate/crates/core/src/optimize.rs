//! One-dimensional sup engine (uniform grid in a mapped variable followed by
//! golden-section refinement) and monotone root bracketing.
//!
//! The reported supremum is always the largest value actually evaluated, so a
//! finite result is a certified lower bound on the true supremum.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// `n` logarithmically spaced points from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| match i {
            0 => lo,
            _ if i == n - 1 => hi,
            _ => (a + (b - a) * i as f64 / (n - 1) as f64).exp(),
        })
        .collect()
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn lin_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// Grid layout for [`sup_log`].
#[derive(Debug, Clone, Copy)]
pub struct LogGrid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    /// Range doublings attempted when the maximum sits on a boundary.
    pub extensions: usize,
    pub refine_steps: usize,
}

impl Default for LogGrid {
    fn default() -> Self {
        Self {
            lo: 1e-8,
            hi: 1e8,
            points: 256,
            extensions: 2,
            refine_steps: 100,
        }
    }
}

/// Result of a numerical supremum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sup {
    pub value: f64,
    pub argmax: f64,
    /// Maximum still increasing at the upper end of the extended range.
    pub diverged: bool,
}

fn clean(v: f64) -> f64 {
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

struct Tracker<'a, F: Fn(f64) -> f64, M: Fn(f64) -> f64> {
    f: &'a F,
    map: &'a M,
    best_z: f64,
    best: f64,
}

impl<F: Fn(f64) -> f64, M: Fn(f64) -> f64> Tracker<'_, F, M> {
    fn eval(&mut self, z: f64) -> f64 {
        let v = clean((self.f)((self.map)(z)));
        if v > self.best {
            self.best = v;
            self.best_z = z;
        }
        v
    }
}

fn golden<F: Fn(f64) -> f64, M: Fn(f64) -> f64>(tr: &mut Tracker<'_, F, M>, mut a: f64, mut b: f64, steps: usize) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = tr.eval(c);
    let mut fd = tr.eval(d);
    for _ in 0..steps {
        if (b - a).abs() <= 1e-14 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = tr.eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = tr.eval(d);
        }
    }
}

/// Supremum over a uniform grid of `points` nodes in `z ∈ [z_lo, z_hi]`,
/// with `x = map(z)`, refined by golden section around the best node.
pub fn sup_mapped<F, M>(f: F, map: M, z_lo: f64, z_hi: f64, points: usize, refine_steps: usize) -> Sup
where
    F: Fn(f64) -> f64,
    M: Fn(f64) -> f64,
{
    let points = points.max(3);
    let dz = (z_hi - z_lo) / (points - 1) as f64;
    let mut tr = Tracker {
        f: &f,
        map: &map,
        best_z: z_lo,
        best: f64::NEG_INFINITY,
    };
    let mut grid_best = (0usize, f64::NEG_INFINITY);
    for i in 0..points {
        let v = tr.eval(z_lo + dz * i as f64);
        if v > grid_best.1 {
            grid_best = (i, v);
        }
    }
    if grid_best.1.is_finite() {
        let i = grid_best.0;
        let a = z_lo + dz * i.saturating_sub(1) as f64;
        let b = z_lo + dz * (i + 1).min(points - 1) as f64;
        golden(&mut tr, a, b, refine_steps);
    }
    Sup {
        value: tr.best,
        argmax: map(tr.best_z),
        diverged: false,
    }
}

/// Supremum of `f` over `x > 0` on a logarithmic grid.
///
/// When the grid maximum lands on a boundary the range is doubled on that
/// side, at most `extensions` times. If the maximum is still at the upper end
/// and still growing after the last doubling the supremum is reported as
/// `+∞`. A maximum stuck at the lower end is returned as the boundary value.
pub fn sup_log<F: Fn(f64) -> f64>(f: F, grid: &LogGrid) -> Sup {
    let density = (grid.points.max(3) - 1) as f64 / (grid.hi.ln() - grid.lo.ln());
    let mut lo = grid.lo.ln();
    let mut hi = grid.hi.ln();
    let mut values: Vec<(f64, f64)> = Vec::new();
    let eval_range = |a: f64, b: f64, out: &mut Vec<(f64, f64)>| {
        let n = (((b - a) * density).round() as usize).max(2);
        for i in 0..=n {
            let z = a + (b - a) * i as f64 / n as f64;
            out.push((z, clean(f(z.exp()))));
        }
    };
    eval_range(lo, hi, &mut values);
    let argbest = |vals: &[(f64, f64)]| {
        let mut idx = 0;
        for (i, v) in vals.iter().enumerate() {
            if v.1 > vals[idx].1 {
                idx = i;
            }
        }
        idx
    };
    let mut idx = argbest(&values);
    let mut diverged = false;
    let mut previous_max = values[idx].1;
    for round in 0..=grid.extensions {
        let at_upper = idx == values.len() - 1;
        let at_lower = idx == 0;
        if !at_upper && !at_lower {
            break;
        }
        if round == grid.extensions {
            if at_upper {
                let n = values.len();
                let rising = n >= 2 && values[n - 1].1 > values[n - 2].1;
                let grew = values[idx].1 > previous_max + 1e-12 * previous_max.abs();
                diverged = rising && (grew || grid.extensions == 0);
            }
            break;
        }
        previous_max = values[idx].1;
        let width = hi - lo;
        if at_upper {
            let mut ext = Vec::new();
            eval_range(hi, hi + width, &mut ext);
            values.extend(ext.into_iter().skip(1));
            hi += width;
        } else {
            let mut ext = Vec::new();
            eval_range(lo - width, lo, &mut ext);
            ext.pop();
            ext.extend(values);
            values = ext;
            lo -= width;
        }
        idx = argbest(&values);
    }
    if diverged {
        return Sup {
            value: f64::INFINITY,
            argmax: f64::INFINITY,
            diverged: true,
        };
    }
    let (z_best, v_best) = values[idx];
    let mut tr = Tracker {
        f: &f,
        map: &f64::exp,
        best_z: z_best,
        best: v_best,
    };
    if v_best.is_finite() {
        let a = values[idx.saturating_sub(1)].0;
        let b = values[(idx + 1).min(values.len() - 1)].0;
        golden(&mut tr, a, b, grid.refine_steps);
    }
    Sup {
        value: tr.best,
        argmax: tr.best_z.exp(),
        diverged: false,
    }
}

/// Supremum over `ε ∈ (0, 1)` using a logit grid on `[-z_max, z_max]`.
pub fn sup_unit_interval<F: Fn(f64) -> f64>(f: F, points: usize, refine_steps: usize) -> Sup {
    let logistic = |z: f64| 1.0 / (1.0 + (-z).exp());
    sup_mapped(f, logistic, -30.0, 30.0, points, refine_steps)
}

/// Supremum over `ρ ∈ (1, ∞)` with `ρ = 1 + e^z`, `e^z ∈ [1e-8, 1e8]`.
pub fn sup_above_one<F: Fn(f64) -> f64>(f: F, points: usize, refine_steps: usize) -> Sup {
    let lo = 1e-8f64.ln();
    let hi = 1e8f64.ln();
    sup_mapped(f, |z: f64| 1.0 + z.exp(), lo, hi, points, refine_steps)
}

/// Finds `x > 0` with `f(x) = target` for a non-decreasing `f`, growing the
/// bracket geometrically from `start`. Returns `None` when no bracket exists
/// after `max_doublings` doublings in either direction.
pub fn solve_increasing<F: Fn(f64) -> f64>(
    f: F,
    target: f64,
    start: f64,
    rtol: f64,
    max_doublings: usize,
) -> Option<f64> {
    let mut lo = start;
    let mut hi = start;
    let mut n = 0;
    while f(hi) < target {
        hi *= 2.0;
        n += 1;
        if n > max_doublings || !hi.is_finite() {
            return None;
        }
    }
    n = 0;
    while f(lo) > target {
        lo *= 0.5;
        n += 1;
        if n > max_doublings || lo == 0.0 {
            return None;
        }
    }
    for _ in 0..400 {
        let mid = if hi > 4.0 * lo {
            (lo * hi).sqrt()
        } else {
            0.5 * (lo + hi)
        };
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid);
        if (v - target).abs() <= rtol * target.abs() && hi - lo <= 1e-15 * hi {
            return Some(mid);
        }
        if v < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let flo = (f(lo) - target).abs();
    let fhi = (f(hi) - target).abs();
    Some(if flo <= fhi { lo } else { hi })
}

/// Root of a non-increasing `f` (`f(x) = target`), same bracketing scheme.
pub fn solve_decreasing<F: Fn(f64) -> f64>(
    f: F,
    target: f64,
    start: f64,
    rtol: f64,
    max_doublings: usize,
) -> Option<f64> {
    solve_increasing(|x| -f(x), -target, start, rtol, max_doublings)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_interior_maximum() {
        // sup_t t(1 - t/4) = 1 at t = 2
        let s = sup_log(|t| t * (1.0 - t / 4.0), &LogGrid::default());
        assert!((s.value - 1.0).abs() < 1e-14);
        assert!((s.argmax - 2.0).abs() < 1e-6);
    }

    #[test]
    fn linear_growth_is_divergent() {
        let s = sup_log(|t| 0.5 * t, &LogGrid::default());
        assert!(s.diverged);
        assert_eq!(s.value, f64::INFINITY);
    }

    #[test]
    fn saturating_growth_is_finite() {
        let s = sup_log(|t| 1.0 - 1.0 / (1.0 + t), &LogGrid::default());
        assert!(!s.diverged);
        assert!((s.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn maximum_beyond_initial_range() {
        let s = sup_log(|t: f64| -(t.ln() - 30.0).powi(2), &LogGrid::default());
        assert!(s.value > -1e-10, "{s:?}");
    }

    #[test]
    fn unit_interval_interior() {
        // max of ε^{3/2}(1-ε)^{1/2} at ε = 3/4
        let s = sup_unit_interval(|e| e.powf(1.5) * (1.0 - e).sqrt(), 128, 40);
        assert!((s.argmax - 0.75).abs() < 1e-6);
    }

    #[test]
    fn bracketing_root() {
        let x = solve_increasing(|x: f64| x.sqrt(), 3.0, 1.0, 1e-14, 1100).unwrap();
        assert!((x - 9.0).abs() < 1e-12);
        let y = solve_decreasing(|x: f64| 1.0 / x, 1e-6, 1.0, 1e-14, 1100).unwrap();
        assert!((y - 1e6).abs() < 1e-6);
        assert!(solve_increasing(|x: f64| 1.0 - (-x).exp(), 2.0, 1.0, 1e-12, 50).is_none());
    }
}
