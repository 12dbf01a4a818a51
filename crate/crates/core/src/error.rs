use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max entry deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix has a non-finite entry")]
    NonFinite,

    #[error("operator is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),

    #[error("trace {0} outside the allowed range")]
    InvalidTrace(f64),

    #[error("matrix function undefined at eigenvalue {0:.3e}")]
    Domain(f64),

    #[error("parameter out of range: {0}")]
    InvalidParameter(String),

    #[error("operators do not commute (max commutator entry {0:.3e})")]
    NotCommuting(f64),

    #[error("support condition violated: {0}")]
    SupportViolation(String),

    #[error("covariance check failed: {0}")]
    NotCovariant(String),

    #[error("channel decomposition mismatch (Choi deviation {0:.3e})")]
    DecompositionMismatch(f64),

    #[error("invalid channel or state spec: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
