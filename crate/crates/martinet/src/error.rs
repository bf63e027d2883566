//! Crate-wide error type.

/// Errors produced by constructors, estimators, and audits.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A scalar argument was outside its admissible range.
    #[error("invalid parameter `{name}`: {value}")]
    InvalidParameter { name: &'static str, value: f64 },

    /// An operation was called on inputs violating its stated precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Named builtin does not exist.
    #[error("unknown builtin field `{0}`")]
    UnknownField(String),

    /// A bracketing root solve could not enclose a sign change.
    #[error("root bracketing failed: {0}")]
    Bracketing(String),

    /// A statistical audit could not reach a verdict at the requested budget.
    #[error("inconclusive: {0}")]
    Inconclusive(String),

    /// A mathematical invariant that must hold was observed to fail.
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
