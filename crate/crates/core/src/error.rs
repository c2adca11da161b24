use thiserror::Error;

/// Errors raised by the library.
///
/// Variants split into caller mistakes (bad sizes, bad arguments, parse
/// failures) and invariant violations that indicate a broken schedule or
/// detector construction. The CLI maps the latter to exit code 2.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right} qubits")]
    Dimension { left: usize, right: usize },

    #[error("operator is not Hermitian: {0}")]
    NotHermitian(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("mechanism flips {count} detectors (hypergraph)")]
    Hypergraph { count: usize, mechanism: String },

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn invariant(msg: impl Into<String>) -> Self {
        Error::Invariant(msg.into())
    }

    /// True for errors signalling a violated internal invariant rather than bad input.
    pub fn is_invariant_violation(&self) -> bool {
        matches!(self, Error::Hypergraph { .. } | Error::Invariant(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
