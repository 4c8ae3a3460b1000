use thiserror::Error;

/// Errors produced by the numerical pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("integration failed at z = {z}: {reason}")]
    Integration { z: f64, reason: String },

    #[error("slope bracket not found: {0}")]
    SlopeBracket(String),

    #[error("bracket invalid: {0}")]
    Bracket(String),

    #[error("classification ambiguous: {0}")]
    Ambiguous(String),

    #[error("classification refused: {0}")]
    Refused(String),

    #[error("solver failure at t = {t}: {reason}")]
    Solver { t: f64, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("comparison setup failed: {0}")]
    Comparison(String),

    #[error("config error at `{path}`: {reason}")]
    Config { path: String, reason: String },

    #[error("malformed artifact: {0}")]
    Artifact(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
