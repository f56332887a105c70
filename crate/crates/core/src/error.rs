use thiserror::Error;

/// Errors raised by the arithmetic and verification layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// The input lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The caller combined objects that do not belong together.
    #[error("usage error: {0}")]
    Usage(String),

    /// A result cannot be certified at the precision that is available.
    #[error("insufficient precision: need {needed}, have {available} ({context})")]
    InsufficientPrecision {
        needed: i64,
        available: i64,
        context: String,
    },

    /// Two computations that must agree did not; signals a bug or a precision shortfall.
    #[error("internal inconsistency: {0}")]
    Inconsistency(String),

    /// The input is valid but the requested route is not implemented for it.
    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("cache error: {0}")]
    Cache(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn precision(needed: i64, available: i64, context: impl Into<String>) -> Self {
        Error::InsufficientPrecision {
            needed,
            available,
            context: context.into(),
        }
    }
}
