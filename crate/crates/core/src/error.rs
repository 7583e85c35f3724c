use thiserror::Error;

/// Errors raised by game models, the solver and the exact oracle.
#[derive(Debug, Error)]
pub enum GameError {
    /// A strategy or instance violates the rules of its game.
    #[error("validation error: {0}")]
    Validation(String),

    /// A strategy space is larger than the configured enumeration cap.
    #[error("capacity error: strategy space holds at least {count} strategies (cap {cap})")]
    Capacity { count: f64, cap: usize },

    /// Parameters or inputs outside their allowed domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl GameError {
    pub fn validation(msg: impl Into<String>) -> Self {
        GameError::Validation(msg.into())
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        GameError::InvalidArgument(msg.into())
    }
}

pub type Result<T, E = GameError> = std::result::Result<T, E>;
