use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("is-a cycle among concepts: {}", .0.join(" -> "))]
    OntologyCycle(Vec<String>),

    #[error("duplicate concept id `{0}`")]
    DuplicateConcept(String),

    #[error("unknown concept `{0}`")]
    UnknownConcept(String),

    #[error("concepts `{0}` and `{1}` are not compatible")]
    Incompatible(String, String),

    #[error("corpus root {0} does not exist")]
    MissingCorpus(PathBuf),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("backend `{backend_id}` failed{}: {message}", if *.retriable { " (retriable)" } else { "" })]
    Backend {
        backend_id: String,
        retriable: bool,
        message: String,
    },

    #[error("backend `{backend_id}` returned vectors of mixed dimension ({expected} vs {found})")]
    DimensionMismatch {
        backend_id: String,
        expected: usize,
        found: usize,
    },

    #[error("generation failed for question {question_index}: {source}")]
    Generation {
        question_index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("macro average needs exactly 13 variable rows, got {0}")]
    RowCount(usize),

    #[error("report serialization: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl AsRef<std::path::Path>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.as_ref().display().to_string(),
            line,
            message: message.into(),
        }
    }
}
