//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json parse error at byte {offset} (line {line}, column {column}): {message}")]
    Json {
        message: String,
        line: usize,
        column: usize,
        offset: usize,
    },

    #[error("missing required column `{0}`")]
    MissingColumn(String),

    #[error("row {row}: {reason}")]
    BadRow { row: usize, reason: String },

    #[error("duplicate id `{0}`")]
    DuplicateId(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("zero variance: target values are constant")]
    ZeroVariance,

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("dimension mismatch: model expects {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("labels contain a single class")]
    SingleClass,

    #[error("matrix factorization failed: {0}")]
    Factorization(String),

    #[error("unsupported schema version {found} (supported: {supported})")]
    SchemaVersion { found: u32, supported: u32 },

    #[error("{0}")]
    Config(String),
}

impl Error {
    /// Wrap a serde_json error, recovering the byte offset from its
    /// line/column against the source text.
    pub fn from_json(err: serde_json::Error, source: &str) -> Self {
        let line = err.line();
        let column = err.column();
        let offset = source
            .lines()
            .take(line.saturating_sub(1))
            .map(|l| l.len() + 1)
            .sum::<usize>()
            + column.saturating_sub(1);
        Error::Json {
            message: err.to_string(),
            line,
            column,
            offset,
        }
    }
}
