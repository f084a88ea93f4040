use thiserror::Error;

/// Errors produced by the phase-unmixing library.
#[derive(Debug, Error)]
pub enum PhunError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    #[error("grid search needs {required} residual evaluations, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("unknown solver `{0}`")]
    UnknownSolver(String),

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Wav(#[from] hound::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, PhunError>;

pub(crate) fn invalid(msg: impl Into<String>) -> PhunError {
    PhunError::InvalidArgument(msg.into())
}

pub(crate) fn mismatch(msg: impl Into<String>) -> PhunError {
    PhunError::DimensionMismatch(msg.into())
}
