//! Harness-level errors.

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("solver error: {0}")]
    Core(#[from] mwf_core::Error),
    #[error("config error: {0}")]
    Config(String),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, HarnessError>;
