use thiserror::Error;

#[derive(Debug, Error)]
pub enum PicodError {
    /// A precondition on the arguments does not hold.
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parse error at {position}: {message}")]
    Parse { position: String, message: String },
    /// An exhaustive computation would exceed its configured budget.
    #[error("budget exceeded: {required} evaluations required, budget is {budget}")]
    Budget { required: u128, budget: u128 },
}

impl PicodError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        PicodError::Domain(msg.into())
    }

    pub(crate) fn parse(position: impl Into<String>, message: impl Into<String>) -> Self {
        PicodError::Parse {
            position: position.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = PicodError> = std::result::Result<T, E>;
