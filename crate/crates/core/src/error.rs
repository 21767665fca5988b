use thiserror::Error;

/// Errors raised by the estimation, testing and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,

    #[error("series too short: need at least {required} observations, got {actual}")]
    TooShort { required: usize, actual: usize },

    #[error("non-finite value at position {index}")]
    NonFinite { index: usize },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("lagged regressor is identically zero")]
    DegenerateRegressor,

    #[error("residual variance is zero; t-statistic undefined")]
    ZeroResidualVariance,

    #[error("input has zero variance")]
    ZeroVariance,

    #[error("autocovariances cover {available} lags but {required} are needed")]
    InsufficientLags { required: usize, available: usize },

    #[error("symmetric eigendecomposition failed")]
    EigenFailure,

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("triangular factor has a non-positive diagonal entry at {index}")]
    SingularFactor { index: usize },

    #[error("long-run variance must be positive, got {0}")]
    NonpositiveLrv(f64),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("bootstrap replicate {index} failed {attempts} times")]
    ReplicateFailure { index: usize, attempts: usize },

    #[error("no critical value tabulated for size {0}")]
    MissingCriticalValue(f64),

    #[error("cell {cell}: {failures} of {reps} replications failed (last error: {last})")]
    CellFailure {
        cell: String,
        failures: usize,
        reps: usize,
        last: String,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
