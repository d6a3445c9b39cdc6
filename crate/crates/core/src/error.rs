use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid or inconsistent configuration (sizes, divisibility, bounds).
    #[error("configuration error: {0}")]
    Config(String),

    /// Numerical failure: singular systems, degenerate geometry, non-finite values.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Shapes of vectors or matrices do not agree.
    #[error("dimension mismatch: {what}: expected {expected}, found {found}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    /// A persisted artifact could not be interpreted.
    #[error("format error in {path}: {msg}")]
    Format { path: PathBuf, msg: String },

    /// A persisted model or dataset was written by an incompatible version.
    #[error("version mismatch: file has format version {found}, expected {expected}")]
    Version { expected: u32, found: u32 },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, msg: impl ToString) -> Self {
        Error::Format {
            path: path.into(),
            msg: msg.to_string(),
        }
    }

    pub(crate) fn dim(what: &'static str, expected: usize, found: usize) -> Self {
        Error::Dimension {
            what,
            expected,
            found,
        }
    }
}
