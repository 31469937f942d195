use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the pipeline.
///
/// Variants are grouped loosely by the stage that raises them. The CLI maps
/// every variant to the "data error" exit code, so usage problems are handled
/// before any of these can occur.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{file}:{line}: malformed record: {message}")]
    MalformedRecord {
        file: String,
        line: usize,
        message: String,
    },

    #[error("{file}:{line}: unparseable timestamp {value:?}: {message}")]
    Timestamp {
        file: String,
        line: usize,
        value: String,
        message: String,
    },

    #[error("duplicate {kind} id {id:?}")]
    DuplicateId { kind: &'static str, id: String },

    #[error("dangling reference: {0}")]
    DanglingReference(String),

    #[error("reply cycle through comments {0:?}")]
    ReplyCycle(Vec<String>),

    #[error("comment {comment} posted before its publication {publication}")]
    CommentBeforePublication { comment: String, publication: String },

    #[error("unknown timezone {0:?}")]
    UnknownTimezone(String),

    #[error("unknown user id {0:?}")]
    UnknownUser(String),

    #[error("unknown publication id {0:?}")]
    UnknownPublication(String),

    #[error("paid troll ids not present in corpus: {}", .0.join(", "))]
    UnknownPaidTrolls(Vec<String>),

    #[error("insufficient non-trolls: need {needed}, have {available}")]
    InsufficientNonTrolls { needed: usize, available: usize },

    #[error("no mentioned trolls in dataset")]
    NoMentionedTrolls,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("vocabulary requires at least one document")]
    EmptyDocuments,

    #[error("vocabulary file: {0}")]
    VocabularyFormat(String),

    #[error("zero denominator {denominator} for user {user}")]
    ZeroDenominator { user: String, denominator: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("training data must contain both classes")]
    SingleClass,

    #[error("non-finite feature value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },

    #[error("class {label} has {count} members, fewer than {folds} folds")]
    ClassTooSmall { label: i8, count: usize, folds: usize },

    #[error("manifest fingerprint mismatch: model {model}, features {features}")]
    FingerprintMismatch { model: String, features: String },

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error("length mismatch: {left} predictions vs {right} gold labels")]
    LengthMismatch { left: usize, right: usize },

    #[error("no eligible paid trolls with at least {0} comments")]
    NoEligiblePaidTrolls(usize),

    #[error("feature subset {0} is empty")]
    EmptyFeatureSubset(String),

    #[error("profile group {0} is empty")]
    EmptyGroup(String),

    #[error("infeasible synthetic spec: {0}")]
    InfeasibleSpec(String),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
