use thiserror::Error;

/// Errors raised by the stratification library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum StrataError {
    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid Jordan type: {0}")]
    InvalidJordanType(String),

    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("size mismatch: expected {expected}, got {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("size {n} outside the supported range {min}..={max}")]
    OutOfBounds { n: usize, min: usize, max: usize },

    #[error("symbolic eigenvalue labels cannot be evaluated numerically")]
    SymbolicLabel,

    #[error("invalid elementary transformation: {0}")]
    InvalidElementary(String),

    #[error("spectra are not separated (gap {gap:.3e} below {threshold:.3e})")]
    SpectraOverlap { gap: f64, threshold: f64 },

    #[error("iteration did not converge after {iterations} sweeps (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("pivot {pivot:.3e} at row {row} is too small; perturbation too large")]
    PivotTooSmall { row: usize, pivot: f64 },

    #[error("numerically ambiguous decision: {0}")]
    Ambiguous(String),

    #[error("eigenvalue computation failed: {0}")]
    Eigen(String),

    #[error("invalid canonical form: {0}")]
    InvalidCanonical(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid matrix file: {0}")]
    MatrixFile(String),
}

pub type Result<T> = std::result::Result<T, StrataError>;
