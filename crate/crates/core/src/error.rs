//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by mesh construction, datum evaluation, the exact
/// oracle, the solver and the verification suites.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid construction parameters (mesh sizes, solver settings, ...).
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Invalid field data (negative tabulated datum, length mismatch, ...).
    #[error("invalid data: {0}")]
    Data(String),

    /// Argument outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The datum exponent q = 1 separates the two closed-form regimes and
    /// admits neither formula.
    #[error("unsupported exponent: {0}")]
    UnsupportedExponent(String),

    /// A stated precondition of a verification check does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The inner linear solve broke down.
    #[error("linear solve breakdown: {0}")]
    LinearSolve(String),
}

pub type Result<T> = std::result::Result<T, Error>;
