use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Caller supplied inconsistent or out-of-range input.
    #[error("invalid input: {0}")]
    Input(String),

    #[error("mesh rejected: {0}")]
    Mesh(String),

    #[error("score is undefined for an empty submesh")]
    UndefinedScore,

    #[error("submeshes belong to different meshes")]
    MeshMismatch,

    #[error("{what} has {got} views; at most {max} are supported")]
    TooLarge {
        what: &'static str,
        got: usize,
        max: usize,
    },

    #[error("update would make a network parameter non-finite")]
    NonFiniteParameter,

    #[error("non-finite network parameter after update in episode {episode}")]
    NonFinite { episode: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed {format} data at byte {offset}: {msg}")]
    Format {
        format: &'static str,
        offset: u64,
        msg: String,
    },

    #[error("{format} syntax error on line {line}: {msg}")]
    Syntax {
        format: &'static str,
        line: usize,
        msg: String,
    },

    #[error("digest mismatch: expected {expected:016x}, found {found:016x}")]
    DigestMismatch { expected: u64, found: u64 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
