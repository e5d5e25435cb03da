use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use sha2::{Digest, Sha256};

use super::model::SpectralModel;
use crate::error::Result;

/// A function on a model's points with its `L¹` and `L²` norms.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    pub values: Vec<f64>,
    pub l1: f64,
    pub l2: f64,
}

impl TestFunction {
    pub fn new(model: &SpectralModel, values: Vec<f64>) -> Self {
        let l1 = model.l1(&values);
        let l2 = model.l2(&values);
        Self { values, l1, l2 }
    }

    /// Hex SHA-256 of the little-endian bytes of the values.
    pub fn hash(&self) -> String {
        hash_values(&self.values)
    }
}

pub fn hash_values(values: &[f64]) -> String {
    let mut hasher = Sha256::new();
    for v in values {
        hasher.update(v.to_le_bytes());
    }
    hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Shape of a random test function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleKind {
    /// White noise smoothed by `e^{−sA}` with a short random time `s`.
    GaussianField,
    /// A few point masses with random signs and sizes.
    SparseSpikes,
    /// White noise smoothed for a long time, leaving the bottom modes.
    LowFrequency,
    /// A constant plus a small Gaussian field.
    NearConstant,
}

const KINDS: [SampleKind; 4] = [
    SampleKind::GaussianField,
    SampleKind::SparseSpikes,
    SampleKind::LowFrequency,
    SampleKind::NearConstant,
];

fn smoothing_time(model: &SpectralModel, rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let top = model.eigenvalues().iter().copied().fold(0.0, f64::max).max(1e-12);
    let u: f64 = rng.random_range(lo.ln()..hi.ln());
    u.exp() / top
}

fn sample(model: &SpectralModel, kind: SampleKind, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let n = model.len();
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let noise = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..n).map(|_| normal.sample(rng)).collect() };
    Ok(match kind {
        SampleKind::GaussianField => {
            let s = smoothing_time(model, rng, 1e-3, 3.0);
            model.apply(|l| (-s * l).exp(), &noise(rng))?
        }
        SampleKind::SparseSpikes => {
            let k = rng.random_range(1..=n.min(4));
            let mut f = vec![0.0; n];
            for _ in 0..k {
                let i = rng.random_range(0..n);
                f[i] += normal.sample(rng) * 10f64.powf(rng.random_range(-1.0..1.0));
            }
            if f.iter().all(|&v| v == 0.0) {
                f[0] = 1.0;
            }
            f
        }
        SampleKind::LowFrequency => {
            let s = smoothing_time(model, rng, 3.0, 300.0);
            model.apply(|l| (-s * l).exp(), &noise(rng))?
        }
        SampleKind::NearConstant => {
            let c = 1.0 + rng.random_range(0.0..2.0);
            let amp = 10f64.powf(rng.random_range(-6.0..-1.0));
            let s = smoothing_time(model, rng, 1e-2, 10.0);
            let field = model.apply(|l| (-s * l).exp(), &noise(rng))?;
            field.iter().map(|v| c + amp * v).collect()
        }
    })
}

/// `count` deterministic random functions cycling through the four shapes.
pub fn random_functions(model: &SpectralModel, count: usize, seed: u64) -> Result<Vec<TestFunction>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            Ok(TestFunction::new(
                model,
                sample(model, KINDS[i % KINDS.len()], &mut rng)?,
            ))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_varied() {
        let m = SpectralModel::torus(1, 32, None).unwrap();
        let a = random_functions(&m, 12, 7).unwrap();
        let b = random_functions(&m, 12, 7).unwrap();
        assert_eq!(a, b);
        let c = random_functions(&m, 12, 8).unwrap();
        assert_ne!(a, c);
        for f in &a {
            assert!(f.l1 > 0.0 && f.l2 > 0.0);
            // ‖f‖₂ ≤ √μ(X) ‖f‖_∞
            let sup = f.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(f.l2 <= m.total_measure().sqrt() * sup * (1.0 + 1e-12));
        }
        assert_eq!(a[0].hash().len(), 64);
        assert_ne!(a[0].hash(), a[1].hash());
    }
}
