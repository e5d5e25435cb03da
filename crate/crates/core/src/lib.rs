// `!(x > 0.0)` is deliberate: it rejects NaN together with the bad range.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::redundant_guards)]

pub mod bernstein;
pub mod constants;
mod error;
pub mod growth;
pub mod legendre;
pub mod optimize;
pub mod quad;
pub mod spectral;
pub mod subordination;
pub mod transforms;
pub mod ultra;

pub use error::{Error, Result};
