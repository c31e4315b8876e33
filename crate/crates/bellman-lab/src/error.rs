//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on the mathematical domain was violated (bad
    /// parameters, out-of-range targets, malformed inputs).
    #[error("domain error: {0}")]
    Domain(String),

    /// A configured resource limit (leaf budget, retry budget) was hit.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// An iterative numeric procedure failed to converge or produced
    /// an unusable value.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// A mathematical invariant that is supposed to be a theorem was
    /// observed to fail. This should never happen.
    #[error("invariant violation: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the CLI: domain errors exit 2, invariant
    /// violations exit 3, everything else exits 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) => 2,
            Error::Invariant(_) => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
