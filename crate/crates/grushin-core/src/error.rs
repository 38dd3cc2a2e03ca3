use thiserror::Error;

/// Errors produced by the numerical kernels and solvers.
#[derive(Error, Debug)]
pub enum GrushinError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("hypotheses violated: {0}")]
    HypothesesViolated(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),

    #[error("domain too small: {0}")]
    DomainTooSmall(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, GrushinError>;
