use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the training, evaluation and simulation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Input violates a documented precondition or schema rule.
    #[error("validation error: {0}")]
    Validation(String),

    /// A CSV row could not be parsed. `row` is the 1-based line number in the file.
    #[error("{path}: row {row}: {message}")]
    Parse {
        path: PathBuf,
        row: usize,
        message: String,
    },

    /// A serialized model file is unreadable, truncated or of the wrong kind.
    #[error("model file error: {0}")]
    ModelFormat(String),

    /// Filesystem failure, annotated with the offending path.
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 2,
            Error::Csv(e) if e.is_io_error() => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
