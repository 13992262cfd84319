use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: malformed record: {message}")]
    MalformedRecord {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("duplicate sample id `{id}` in dataset `{dataset}`")]
    DuplicateId { dataset: String, id: String },

    #[error("sample `{id}` does not match task kind of dataset `{dataset}`: {message}")]
    TaskMismatch {
        dataset: String,
        id: String,
        message: String,
    },

    #[error("invalid manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("dataset `{0}` is empty")]
    EmptyDataset(String),

    #[error("need {needed} {what}, found {found}")]
    NotEnough { what: String, needed: usize, found: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite loss {loss} on batch from `{dataset}` (head `{head}`)")]
    NonFiniteLoss { loss: f64, dataset: String, head: String },

    #[error("model has no answer head `{0}`")]
    MissingHead(String),

    #[error("no ensemble member passed threshold {threshold} for task `{task}`; lower the threshold")]
    NoSurvivors { task: String, threshold: f64 },

    #[error("json error in {context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json {
            context: context.into(),
            source,
        }
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        match self {
            Error::Stage { .. } => self,
            other => Error::Stage {
                stage,
                source: Box::new(other),
            },
        }
    }
}
