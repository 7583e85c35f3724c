use thiserror::Error;

use stackevo_core::GameError;

#[derive(Debug, Error)]
pub enum BenchError {
    /// The experiment description itself is unusable.
    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Game(#[from] GameError),

    #[error("{path}: {source}")]
    Load { path: String, source: GameError },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

pub type Result<T, E = BenchError> = std::result::Result<T, E>;
