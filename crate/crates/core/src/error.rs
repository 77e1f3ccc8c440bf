use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid belief state: {0}")]
    InvalidBeliefState(String),

    #[error("template for {task}: {message}")]
    Template { task: String, message: String },

    #[error("no value supplied for placeholder {{{0}}}")]
    MissingPlaceholder(String),

    #[error("compiled record {0} has an empty source or target")]
    EmptyRecord(String),

    #[error("no template registered for task {0}")]
    MissingTemplate(String),

    #[error("duplicate id {0}")]
    DuplicateId(String),

    #[error("corpus BLEU is undefined for an empty corpus")]
    EmptyCorpus,

    #[error("reference is empty")]
    EmptyReference,

    #[error("{name} = {value} is outside [0, 100]")]
    OutOfRange { name: &'static str, value: f64 },

    #[error("label lists differ in length: {gold} gold vs {predicted} predicted")]
    LengthMismatch { gold: usize, predicted: usize },

    #[error("invalid bucket spec: {0}")]
    InvalidBucketSpec(String),

    #[error("sample {id} has no value for aspect {aspect}")]
    MissingAspect { id: String, aspect: String },

    #[error("percentage {0} must lie in (0, 100]")]
    InvalidPercentage(f64),

    #[error("cannot sample from an empty id list")]
    EmptyIds,

    #[error("k must be at least 1")]
    InvalidK,

    #[error("target domain {0} does not occur in any single-domain dialogue")]
    UnknownDomain(String),

    #[error("source pool holds {available} dialogues, {required} needed for validation (short by {})", required - available)]
    InsufficientSource { required: usize, available: usize },

    #[error("prediction references unknown turn {dialogue_id}#{turn_index}")]
    UnknownTurn {
        dialogue_id: String,
        turn_index: usize,
    },

    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
