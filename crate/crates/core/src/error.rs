use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value encountered at step {step}: {what}")]
    NonFinite { step: usize, what: String },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("not enough usable scales for a fit: {usable} < {required}")]
    InsufficientScales { usable: usize, required: usize },

    #[error("malformed trajectory file: {0}")]
    Format(String),

    #[error("config error in {path:?}: {reason}")]
    Config { path: Option<PathBuf>, reason: String },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
