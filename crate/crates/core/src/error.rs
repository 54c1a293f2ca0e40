use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("inadmissible stable parameters (alpha={alpha}, beta={beta}): {reason}")]
    InvalidStableParams {
        alpha: f64,
        beta: f64,
        reason: &'static str,
    },
    #[error("invalid offspring law: {0}")]
    InvalidOffspringLaw(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("empty sample")]
    EmptySample,
    #[error("fixed-point iteration did not converge after {iterations} iterations (last sup-norm delta {last_delta:e})")]
    NonConvergence { iterations: usize, last_delta: f64 },
    #[error("fit needs at least {needed} usable points in the window, found {found}")]
    TooFewPoints { needed: usize, found: usize },
    #[error("non-positive value {value} at x={x} inside the fit window")]
    NonPositive { x: f64, value: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
