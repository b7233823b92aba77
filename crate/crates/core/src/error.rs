use thiserror::Error;

/// Errors raised by the numeric kernel, state construction and the bound evaluators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (max |A - A^dagger| = {asymmetry:e})")]
    NonHermitian { asymmetry: f64 },

    #[error("matrix is not positive semi-definite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("mixing weight {0} outside [0, 1]")]
    LambdaOutOfRange(f64),

    #[error("{name} = {value} outside [0, 1]")]
    OutOfRange { name: &'static str, value: f64 },

    #[error(
        "max-relative entropy is infinite: support of rho is not contained in support of sigma"
    )]
    InfiniteLambda0,

    #[error("decomposition undefined: lambda0 = {lambda0} is numerically 1 (rho == sigma)")]
    DegenerateDecomposition { lambda0: f64 },

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
