//! Error type shared by every module in the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong below the CLI boundary.
///
/// Numerical code returns `NumericFailure` instead of panicking so a sweep
/// over many configurations can record the failure and move on.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument violated a precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A linear-algebra or optimization step failed (non-SPD system,
    /// non-finite values, divergence).
    #[error("numeric failure: {0}")]
    NumericFailure(String),

    /// A data file had the wrong shape: missing columns, unknown labels,
    /// inconsistent row lengths.
    #[error("schema error: {0}")]
    Schema(String),

    /// A cell of a data file failed to parse. Rows and columns are 1-based
    /// as a text editor would count them.
    #[error("parse error at row {row}, column {col}: {message}")]
    Parse {
        row: usize,
        col: usize,
        message: String,
    },

    /// A binary file had a bad magic number or truncated payload.
    #[error("format error: {0}")]
    Format(String),

    /// An underlying I/O operation failed; `path` names the file involved.
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Convenience constructor that captures the offending path alongside
    /// the OS error.
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
