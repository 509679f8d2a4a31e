//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by scenario generation, model evaluation, the numerical
/// kernels and the harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index out of range: {what} is {got}, limit {limit}")]
    IndexOutOfRange {
        what: &'static str,
        got: usize,
        limit: usize,
    },

    #[error("mode vector infeasible: {0}")]
    ModeInfeasible(String),

    #[error("receive filter must be nonzero")]
    InvalidFilter,

    #[error("numerical domain error: {0}")]
    NumericalDomain(String),

    #[error("invalid conic problem: {0}")]
    InvalidProblem(String),

    #[error("constraints infeasible: {0}")]
    InfeasibleConstraints(String),

    #[error("solver failure: {0}")]
    SolverFailure(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
