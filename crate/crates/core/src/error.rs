use std::path::PathBuf;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid event indicator {value:?} on line {line} (expected 0 or 1)")]
    InvalidEvent { line: usize, value: String },

    #[error("missing value in column {column:?} on line {line}")]
    MissingValue { line: usize, column: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("invalid dataset: {0}")]
    InvalidData(String),

    #[error("empty input")]
    EmptyInput,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("sample has {found} unique death times, need at least {required}")]
    InsufficientDeaths { found: usize, required: usize },

    #[error("tree {tree}: no bootstrap draw with at least {d0} unique death times after {attempts} attempts")]
    RetryCapExhausted { tree: usize, d0: usize, attempts: usize },

    #[error("invalid sampling weights: {0}")]
    InvalidWeights(String),

    #[error("IPCW undefined for training record {index}: censoring survival is 0 just before its time (IPCW inapplicable at the latest times)")]
    IpcwUndefined { index: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("test case {case}: {source}")]
    TestCase {
        case: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
