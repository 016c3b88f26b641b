use thiserror::Error;

/// Errors raised by the integration engine and its instances.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("universe mismatch: {0}")]
    UniverseMismatch(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("sets overlap at witness point {witness}")]
    Overlap { witness: String },

    #[error("sequence is not monotone at index {index}, probe {probe}")]
    NonMonotone { index: usize, probe: String },

    #[error("level sets do not nest: {0}")]
    Nesting(String),

    #[error("tolerance {tol} unreachable, best achieved bound {achieved}")]
    Unreachable { tol: String, achieved: String },

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("malformed input: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
