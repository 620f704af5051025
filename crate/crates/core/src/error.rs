use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the test pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },

    #[error("ingestion error at row {row}, column `{column}`: {message}")]
    Ingest {
        row: usize,
        column: String,
        message: String,
    },

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("too few samples: need at least {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),

    #[error("family `{0}` has no closed-form conditional sampler")]
    UnsupportedFamily(String),

    #[error("repetition {m}: {source}")]
    Repetition {
        m: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        Error::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }

    /// True for errors caused by the caller's input rather than by a run.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::Io { .. }
            | Error::Ingest { .. }
            | Error::MissingColumn(_)
            | Error::TooFewSamples { .. }
            | Error::InvalidConfig(_)
            | Error::UnsupportedFamily(_) => true,
            Error::Repetition { source, .. } => source.is_input_error(),
            _ => false,
        }
    }
}
