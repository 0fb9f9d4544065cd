use std::path::PathBuf;

/// Errors produced anywhere in the modeling pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: invalid UTF-8")]
    InvalidUtf8 { path: PathBuf, line: usize },
    #[error("corpus has {documents} lines but label file has {labels}")]
    LabelCountMismatch { documents: usize, labels: usize },
    #[error("corpus is not fully labeled ({labeled} of {documents} documents carry a label)")]
    Unlabeled { labeled: usize, documents: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("no non-empty documents to train on")]
    NoTrainingData,
    #[error("sampler invariant violated: {0}")]
    Invariant(String),
    #[error("input length mismatch: {left} assignments vs {right} labels")]
    LengthMismatch { left: usize, right: usize },
    #[error("evaluation requires at least one document")]
    EmptyEvaluation,
    #[error("serialization failed: {0}")]
    Serde(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
