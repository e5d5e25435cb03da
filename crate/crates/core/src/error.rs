use thiserror::Error;

/// Errors raised by the calculus and verification routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown catalog member `{0}`")]
    UnknownFamily(String),

    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("malformed specification `{spec}`: {reason}")]
    Parse { spec: String, reason: String },

    #[error("argument {value} outside the domain ({lo}, {hi})")]
    Domain { value: f64, lo: f64, hi: f64 },

    #[error("inversion failed: {0}")]
    InversionFailed(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("constant Bernstein function `{0}` has an empty transfer domain")]
    ConstantFunction(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("not ultracontractive: {0}")]
    NotUltracontractive(String),

    #[error("invalid spectral model: {0}")]
    Model(String),

    #[error("function of the operator is infinite on occupied eigenvalue {0}")]
    InfiniteOnSpectrum(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
