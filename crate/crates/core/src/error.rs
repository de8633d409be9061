use thiserror::Error;

use crate::canonicity::Counterexample;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid signature: {0}")]
    Signature(String),

    #[error("malformed structure: {0}")]
    Structure(String),

    #[error("no completion inside the age for demand (fragment size {fragment_size}, extension {extension})")]
    AmalgamationFailure {
        fragment_size: usize,
        extension: usize,
    },

    #[error("arity {requested} exceeds the configured limit {limit}")]
    ArityLimitExceeded { requested: usize, limit: usize },

    #[error("type mismatch: {0}")]
    TypeMismatch(String),

    #[error("function undefined at {0}")]
    DomainGap(String),

    #[error("function is not canonical: {0}")]
    NotCanonical(Box<Counterexample>),

    #[error("density probe failed for {set}: {reason}")]
    DensityProbeFailure { set: String, reason: String },

    #[error("search budget exhausted: {0}")]
    BudgetExhausted(String),

    #[error("unsupported presentation: {0}")]
    Presentation(String),

    #[error("point does not match the presentation: {0}")]
    Point(String),

    #[error("invalid oracle: {0}")]
    Oracle(String),

    #[error("line {line}: {reason}")]
    Format { line: usize, reason: String },
}
