use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}:{line}: self-loop on vertex `{vertex}`")]
    SelfLoop {
        path: PathBuf,
        line: usize,
        vertex: String,
    },

    #[error("{path}:{line}: duplicate edge {src} -[{rel}]- {dst}")]
    DuplicateEdge {
        path: PathBuf,
        line: usize,
        src: String,
        rel: String,
        dst: String,
    },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    /// A precondition of an operation was not met (width or length mismatch, wrong variant, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// The work an operation would need exceeds a configured cap; nothing was computed.
    #[error("refused: {what} needs {needed}, cap is {cap}")]
    CapExceeded {
        what: &'static str,
        needed: u128,
        cap: u128,
    },

    #[error("unknown suite `{0}`")]
    UnknownSuite(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub fn is_refusal(&self) -> bool {
        matches!(self, Error::CapExceeded { .. })
    }
}
