use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("schema error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Schema { line: Option<usize>, message: String },

    #[error("ordering error: document {later} (t={later_time}) follows {earlier} (t={earlier_time})")]
    Ordering {
        earlier: String,
        earlier_time: i64,
        later: String,
        later_time: i64,
    },

    #[error("load error: {0}")]
    Load(String),

    #[error("invalid topic {entity_id}: {reason}")]
    InvalidTopic { entity_id: String, reason: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("training error: {0}")]
    Training(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("experiment error: {0}")]
    Experiment(String),
}

impl Error {
    /// Process exit status for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 3,
            Error::Parse { .. } | Error::Schema { .. } | Error::Ordering { .. } | Error::Load(_) => 4,
            Error::InvalidTopic { .. } => 5,
            Error::Config(_) | Error::Parameter(_) => 6,
            Error::Training(_) | Error::Degenerate(_) => 7,
            Error::Evaluation(_) => 8,
            Error::Experiment(_) => 9,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn schema(message: impl Into<String>) -> Self {
        Error::Schema {
            line: None,
            message: message.into(),
        }
    }

    /// Splits serde_json failures into malformed-input (`Parse`) and
    /// well-formed-but-invalid (`Schema`) errors.
    pub(crate) fn from_json(line: usize, err: serde_json::Error) -> Self {
        use serde_json::error::Category;
        match err.classify() {
            Category::Data => Error::Schema {
                line: Some(line),
                message: err.to_string(),
            },
            _ => Error::Parse {
                line,
                message: err.to_string(),
            },
        }
    }
}
