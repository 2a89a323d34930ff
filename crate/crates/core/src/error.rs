use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),

    #[error("missing column `{column}`")]
    MissingColumn { column: String },

    #[error("row {row}, column `{column}`: cannot parse `{value}`: {reason}")]
    Cell {
        row: usize,
        column: String,
        value: String,
        reason: String,
    },

    #[error("row {row}: label `{value}` is not 0 or 1")]
    Label { row: usize, value: String },

    #[error("invalid data: {0}")]
    Data(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("missing feature `{0}`")]
    MissingFeature(String),

    #[error("unknown feature `{0}`")]
    UnknownFeature(String),

    #[error("persona validation failed: missing or empty section `{section}`")]
    MissingSection { section: String },

    #[error("unsupported model format version `{found}` (supported: `{supported}`)")]
    UnsupportedVersion { found: String, supported: String },

    #[error("model parse error at byte {offset}: {message}")]
    ModelParse { offset: usize, message: String },

    #[error("cluster {cluster}: {source}")]
    InCluster {
        cluster: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Llm(#[from] LlmError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_cluster(self, cluster: usize) -> Self {
        Error::InCluster {
            cluster,
            source: Box::new(self),
        }
    }

    /// Strips any cluster context.
    pub fn root(&self) -> &Error {
        match self {
            Error::InCluster { source, .. } => source.root(),
            other => other,
        }
    }
}

/// Failures of a persona backend.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LlmError {
    #[error("LLM endpoint returned HTTP {status} after {attempts} attempt(s)")]
    Transport { status: u16, attempts: u32 },

    #[error("LLM endpoint unreachable after {attempts} attempt(s): {message}")]
    Connection { message: String, attempts: u32 },

    #[error("LLM request timed out after {attempts} attempt(s)")]
    Timeout { attempts: u32 },

    #[error("malformed completion: {0}")]
    Protocol(String),

    #[error("LLM configuration: {0}")]
    Config(String),
}
