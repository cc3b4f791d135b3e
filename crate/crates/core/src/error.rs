use thiserror::Error;

/// Errors produced by fitting, evaluation and I/O.
#[derive(Debug, Error)]
pub enum VdaError {
    #[error("invalid class count {0}: at least two classes are required")]
    InvalidClassCount(usize),

    #[error("unknown class label `{0}`")]
    UnknownClass(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("stratification failed: {0}")]
    Stratification(String),

    #[error("relative MSE is undefined: the reference coefficients are all zero")]
    UndefinedMse,

    #[error("{0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl VdaError {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        VdaError::Shape(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        VdaError::InvalidConfig(msg.into())
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        VdaError::InvalidInput(msg.into())
    }

    /// True for errors caused by bad user input or configuration rather than
    /// a failure while running.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            VdaError::InvalidConfig(_) | VdaError::InvalidClassCount(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, VdaError>;
