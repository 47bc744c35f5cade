use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("mode index {requested} exceeds capacity {capacity}")]
    Capacity { requested: usize, capacity: usize },

    #[error("capacity mismatch: {left} vs {right}")]
    CapacityMismatch { left: usize, right: usize },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("out of scope: {0}")]
    OutOfScope(&'static str),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("iterate left the ball B_n at iteration {iteration}: norm {measured} > {bound}")]
    BallViolation {
        iteration: usize,
        measured: f64,
        bound: f64,
    },

    #[error("fixed-point iteration did not converge after {iterations} iterations (last residual {})", .residuals.last().copied().unwrap_or(f64::NAN))]
    NonConvergence {
        iterations: usize,
        residuals: Vec<f64>,
    },

    #[error("constraint violated at t = {time} near x = {location}: certified bound {certified} < alpha = {alpha}")]
    Inadmissible {
        time: f64,
        location: f64,
        certified: f64,
        alpha: f64,
    },

    #[error("explicit integrator became unstable at t = {time}")]
    Instability { time: f64 },
}

impl Error {
    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
