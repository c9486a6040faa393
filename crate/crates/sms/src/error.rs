use thiserror::Error;

#[derive(Debug, Error)]
pub enum SmsError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("trajectory too short: {0}")]
    TrajectoryTooShort(String),
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
    #[error("checkpoint format error: {0}")]
    Checkpoint(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SmsError>;
