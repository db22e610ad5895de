use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ErwsError {
    #[error("invalid probability simplex: {0}")]
    InvalidSimplex(String),

    #[error("degenerate parameters: {0}")]
    DegenerateParameters(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("series did not converge: {0}")]
    ConvergenceFailure(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("wrong regime: {0}")]
    Regime(String),

    #[error("path record has no increments; simulate with increments enabled")]
    MissingIncrements,

    #[error("step budget exceeded: {0}")]
    Budget(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T> = std::result::Result<T, ErwsError>;

impl ErwsError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        ErwsError::Domain(msg.into())
    }
}
