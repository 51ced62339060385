use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("{path}: {cause}")]
    Io { path: PathBuf, cause: std::io::Error },

    #[error("{path}: malformed csv: {message}")]
    Csv { path: PathBuf, message: String },

    #[error("{path}: cannot parse {value:?} as a number at row {row}, column {column:?}")]
    CsvParse {
        path: PathBuf,
        row: usize,
        column: String,
        value: String,
    },

    #[error("{path}: column {0:?} not found in header", .column)]
    MissingColumn { path: PathBuf, column: String },

    #[error("{path}: unknown label {value:?} at row {row}")]
    UnknownLabel { path: PathBuf, row: usize, value: String },

    #[error("cannot stratify: class {class} has {count} sample(s), need at least 2")]
    Stratification { class: usize, count: usize },

    #[error("training labels contain a single class")]
    SingleClass,

    #[error("{0} used before fit")]
    NotFitted(&'static str),

    #[error("{0} requires a nonzero matrix")]
    ZeroMatrix(&'static str),

    #[error("representation has zero variance after centering")]
    ZeroVariance,

    #[error("polynomial expansion needs {needed} entries, budget is {budget}")]
    Infeasible { needed: usize, budget: usize },

    #[error("dataset {dataset:?}: method {method:?} has no result for seed {seed}")]
    Pairing { dataset: String, method: String, seed: u64 },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("numerical routine failed to converge: {0}")]
    NoConvergence(&'static str),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            cause: source,
        }
    }
}
