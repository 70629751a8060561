use thiserror::Error;

/// Errors reported by every fallible operation in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Input outside the mathematical domain of a function.
    #[error("domain error in {func}: {msg}")]
    Domain { func: &'static str, msg: String },

    /// Malformed or inconsistent arguments (empty lists, mixed sides, bad options).
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Evaluation point outside an admissible numeric range.
    #[error("{msg} (admissible range [{low}, {high}])")]
    Range { msg: String, low: f64, high: f64 },

    /// Descriptor text that does not parse.
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    /// A computation would have produced NaN.
    #[error("not a number produced in {0}")]
    NotANumber(&'static str),

    /// Requested capability not available for this input.
    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(func: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain { func, msg: msg.into() }
    }

    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
