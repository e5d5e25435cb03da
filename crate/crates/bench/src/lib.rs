//! Shared fixtures for the benchmarks.

use bochner_core::spectral::{random_functions, SampleSet, SpectralModel};

/// A torus model with a fixed batch of random test functions.
pub fn torus_fixture(d: usize, n: usize, samples: usize) -> (SpectralModel, SampleSet) {
    let model = SpectralModel::torus(d, n, None).expect("valid torus");
    let fs = random_functions(&model, samples, 0).expect("samples");
    let set = SampleSet::new(&model, fs).expect("sample set");
    (model, set)
}
