use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid potential: {0}")]
    InvalidPotential(String),
    #[error("iteration did not converge: {0}")]
    NonConvergence(String),
    #[error("lambda too close to a zero of t00: |t00| = {0:.3e}")]
    NearBoundState(f64),
    #[error("linear system is singular or ill-conditioned (condition estimate {0:.3e})")]
    IllConditioned(f64),
    #[error("fit rejected: {0}")]
    FitRejected(String),
    #[error("consistency check failed: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, Error>;
