//! Crate-wide error type and result alias.

use std::path::PathBuf;
use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors produced by any vecpress operation.
#[derive(Debug, Error)]
pub enum Error {
    /// Underlying I/O failure, with the path that was being touched.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A file exists but does not follow the expected container layout.
    #[error("format error in {path}: {message}")]
    Format { path: PathBuf, message: String },

    /// Input data violates a documented precondition or invariant.
    #[error("{0}")]
    Validation(String),

    /// Two objects that must share a dimension count do not.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// NaN cannot be represented in any of the storage formats.
    #[error("cannot encode NaN")]
    NanInput,

    /// No configuration point fits under the requested byte budget.
    #[error(
        "infeasible budget: no configuration fits {budget} bytes; \
         smallest is {smallest_label} at {smallest_bytes} bytes"
    )]
    InfeasibleBudget {
        budget: u64,
        smallest_label: String,
        smallest_bytes: u64,
    },

    /// A sweep completed but some configurations failed.
    #[error("sweep finished with {failed} failed configuration(s)")]
    PartialSweep { failed: usize },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn validation(message: impl Into<String>) -> Self {
        Error::Validation(message.into())
    }

    /// Process exit code used by the command-line interface.
    ///
    /// 1 = I/O, 2 = validation/format, 3 = partial sweep failure,
    /// 4 = infeasible budget.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 1,
            Error::Format { .. }
            | Error::Validation(_)
            | Error::DimensionMismatch { .. }
            | Error::NanInput => 2,
            Error::PartialSweep { .. } => 3,
            Error::InfeasibleBudget { .. } => 4,
        }
    }
}
