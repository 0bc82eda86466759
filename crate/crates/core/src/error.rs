use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{path}: line {line}: {message}")]
    ParseFile {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("manifest: {0}")]
    Manifest(String),

    #[error("invalid value: {0}")]
    Invalid(String),

    #[error("drift spec line {line}: {message}")]
    Spec { line: usize, message: String },

    #[error("no evaluable classes (every class has zero ground-truth boxes)")]
    NoEvaluableClasses,

    #[error("histogram bin mismatch: {0} vs {1}")]
    BinMismatch(usize, usize),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Image { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::Invalid(message.into())
    }

    /// True for errors caused by bad input or arguments rather than a failing
    /// environment. The CLI maps these to exit code 2 and the rest to 1.
    pub fn is_usage(&self) -> bool {
        !matches!(self, Error::Io { .. } | Error::Image { .. })
    }
}
