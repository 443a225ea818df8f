//! Shared error type for the library.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Descriptor text did not conform to the grammar.
    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },

    /// An operator evaluation produced a non-finite or out-of-range entry.
    #[error("domain violation: {op} at row {row}")]
    DomainViolation { op: &'static str, row: usize },

    /// A descriptor references a primary-feature index not present in the data.
    #[error("unknown leaf x{leaf} (data has {width} features)")]
    UnknownLeaf { leaf: usize, width: usize },

    /// Generation or selection was handed an empty input space.
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    /// Binary generation needs at least two descriptors.
    #[error("need at least two descriptors, got {0}")]
    TooFewDescriptors(usize),

    /// Input data contained NaN or infinity where finite values are required.
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    /// Sample size too small for the requested fit.
    #[error("too few observations: {n} (need at least {min})")]
    TooFewObservations { n: usize, min: usize },

    /// Exhaustive subset search would exceed the configured budget.
    #[error("subset budget exceeded: C({p},{k}) = {count} > {budget}; pre-screen the space first")]
    BudgetExceeded {
        p: usize,
        k: usize,
        count: u128,
        budget: u128,
    },

    /// Nonparametric screening selected nothing in the first iteration.
    #[error("no signal: screening selected no descriptor in iteration 0")]
    NoSignal,

    /// Generic input validation failure.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// File IO failure.
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
