use thiserror::Error;

/// Errors surfaced by tensor ops, the feature pipeline, the model, and IO.
#[derive(Debug, Error)]
pub enum FerError {
    #[error("shape mismatch in {context}: {detail}")]
    ShapeMismatch { context: &'static str, detail: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl FerError {
    pub fn shape(context: &'static str, detail: impl Into<String>) -> Self {
        FerError::ShapeMismatch { context, detail: detail.into() }
    }

    pub fn invalid(detail: impl Into<String>) -> Self {
        FerError::InvalidArgument(detail.into())
    }

    pub fn non_finite(what: impl Into<String>) -> Self {
        FerError::NonFinite(what.into())
    }
}

pub type Result<T> = std::result::Result<T, FerError>;
