use thiserror::Error;

use crate::model::ValidationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model specification:\n{0}")]
    Invalid(ValidationReport),

    #[error("phase component out of range: {0}")]
    PhaseOutOfRange(String),

    #[error("phase {phase} has zero exit rate")]
    DegenerateState { phase: usize },

    /// The limiting jump chain only has the stated structure when every
    /// environment state retries at a positive rate.
    #[error("retrial rate is zero in environment state {env}; limiting jump chain undefined")]
    ZeroRetrialRate { env: usize },

    #[error("limiting jump matrix is not stochastic (max row-sum error {0:e})")]
    NotStochastic(f64),

    #[error("no unique stationary vector: {0}")]
    NoUniqueStationary(String),

    #[error("generator is reducible")]
    Reducible,

    #[error("model is not positive recurrent (rho = {rho:.6}); run `stability` for details")]
    Unstable { rho: f64 },

    #[error("rate-matrix recursion degenerate at level {level}: {reason}")]
    SolverDegenerate { level: usize, reason: String },

    #[error("boundary equation degenerate: {0}")]
    BoundaryDegenerate(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("orbit size exceeded cap {cap} in replication {replication} at t = {time:.3}; instability suspected")]
    OrbitCapExceeded { cap: u64, replication: usize, time: f64 },

    #[error("scenario parse error: {0}")]
    Scenario(String),
}
