use chrono::NaiveDate;
use thiserror::Error;

/// Crate-wide error type. Variants map onto the failure classes the
/// pipeline distinguishes: parse/validation problems in input files,
/// data gaps during execution, configuration mistakes, and contract
/// violations between stages.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("data gap: no bar for {asset} on {date}")]
    DataGap { asset: String, date: NaiveDate },

    #[error("no predecessor: {0} is the first trading day in the calendar")]
    NoPredecessor(NaiveDate),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("contract error: {0}")]
    Contract(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("scoring error for article {article_id}: {msg}")]
    Scoring { article_id: String, msg: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
