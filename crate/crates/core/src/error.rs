use thiserror::Error;

/// Failure modes shared by every numerical routine in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("no convergence after {iterations} steps (estimate {estimate:e}, error {error:e})")]
    NonConvergence {
        iterations: usize,
        estimate: f64,
        error: f64,
    },

    #[error("could not bracket target {target:e}: last bracket [{lo:e}, {hi:e}]")]
    BracketFailure { target: f64, lo: f64, hi: f64 },

    #[error(
        "user {user}: activation probability {probability:e} is too small for the on-off scheme"
    )]
    DegenerateActivation { user: usize, probability: f64 },

    #[error("policy returned invalid power {power} for user {user}")]
    Policy { user: usize, power: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
