//! Error type shared by every module in the crate.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A value fell outside its documented range.
    #[error("{what} out of range: got {got}, expected {expected}")]
    OutOfRange {
        what: &'static str,
        got: String,
        expected: &'static str,
    },

    /// Structurally invalid input: empty data, mismatched lengths,
    /// non-finite values, inconsistent configuration.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// A posterior system could not be factorized; `index` is the first
    /// Cholesky pivot that was not strictly positive.
    #[error("singular system: Cholesky pivot {index} is {value:e}")]
    Singular { index: usize, value: f64 },

    /// The target vector cannot support the requested metric
    /// (for example R^2 of a constant target).
    #[error("degenerate target: {0}")]
    DegenerateTarget(String),

    /// Malformed text input, with file, line, and column context.
    /// Line numbers are 1-based; line 0 means the file as a whole.
    #[error("{}:{line}: column {column}: {reason}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        column: String,
        reason: String,
    },

    /// Filesystem failure, wrapping the OS error.
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(
        path: impl Into<PathBuf>,
        line: usize,
        column: impl Into<String>,
        reason: impl Into<String>,
    ) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            column: column.into(),
            reason: reason.into(),
        }
    }

    /// True for filesystem errors, false for validation-class errors.
    /// The CLI maps the former to exit code 2 and the latter to 1.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}
