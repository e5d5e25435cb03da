//! Finite spectral models and the inequality-verification harness.
//!
//! Every check works from the power spectrum `p_i` of a test function, so a
//! sweep over many parameter values costs one transform per function.

mod checks;
mod model;
mod profile;
mod samples;

pub use checks::{
    check_decay, check_elementary, check_gap_decay, check_nash, check_super_poincare, GapReport, Phi, Report,
    SampleSet, MARGIN_TOL,
};
pub use model::{parse_matrix_text, read_matrix_file, Coefficients, ModelKind, SpectralModel, EIGEN_CLAMP};
pub use profile::{estimate_profile, fourier_rate, fourier_rate_function, ProfileEstimate};
pub use samples::{hash_values, random_functions, SampleKind, TestFunction};

use crate::error::Result;

/// `φ(A) f`.
pub fn apply_function_of_operator(model: &SpectralModel, phi: &Phi, f: &TestFunction) -> Result<TestFunction> {
    let values = model.apply(|l| phi.eval(l), &f.values)?;
    Ok(TestFunction::new(model, values))
}

/// `(φ(A) f, f)`.
pub fn quadratic_form(model: &SpectralModel, phi: &Phi, f: &TestFunction) -> Result<f64> {
    model.quadratic_form(|l| phi.eval(l), &f.values)
}
