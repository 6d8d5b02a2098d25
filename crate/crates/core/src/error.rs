use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CollapseError {
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// φ̇ and χ̇ contain 1/sin θ and are undefined at the poles.
    #[error("pole singularity at theta = {theta}")]
    PoleSingularity { theta: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, CollapseError>;
