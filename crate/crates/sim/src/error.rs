use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    /// Bad scenario or command-line input.
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] vistrack_core::Error),

    #[error("trajectory generation failed: {0}")]
    Generation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl SimError {
    /// Whether the error comes from the inputs rather than from running them.
    pub fn is_config(&self) -> bool {
        matches!(self, SimError::Config(_) | SimError::Core(_))
    }
}

pub type SimResult<T> = Result<T, SimError>;
