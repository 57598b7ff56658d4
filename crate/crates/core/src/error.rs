use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Size bounds applied by every enumerating construction.
///
/// All exhaustive predicates in this crate quantify over finite but
/// potentially large sets; these caps turn a runaway enumeration into an
/// explicit [`Error::CapExceeded`] instead of a hang.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    /// Maximum number of morphisms in a single hom-set.
    pub max_homset: usize,
    /// Maximum number of sieves enumerated at a single object.
    pub max_sieves_per_object: usize,
    /// Maximum number of candidate descent data visited per sieve.
    pub max_descent: usize,
    /// Maximum number of morphisms produced by closing a presentation.
    pub max_closure: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_homset: 64,
            max_sieves_per_object: 65_536,
            max_descent: 100_000,
            max_closure: 10_000,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{what} exceeds the cap of {limit}")]
    CapExceeded { what: String, limit: usize },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn cap(what: impl Into<String>, limit: usize) -> Self {
        Error::CapExceeded { what: what.into(), limit }
    }

    pub(crate) fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
