use std::path::PathBuf;

use thiserror::Error;

use crate::trace::TruncateAt;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty corpus")]
    EmptyCorpus,

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("trace {trace_id}: invalid {field}: {reason}")]
    Validation {
        trace_id: String,
        field: &'static str,
        reason: String,
    },

    #[error("trace {trace_id}: outcome not recorded for truncate_at={at}")]
    OutcomeNotRecorded { trace_id: String, at: TruncateAt },

    #[error("strategy {strategy} inapplicable to corpus: {reason}")]
    StrategyInapplicable { strategy: String, reason: String },

    #[error("invalid rule set: {0}")]
    InvalidRules(String),

    #[error("invalid parameters: {0}")]
    Params(String),

    #[error("insufficient truncation coverage: {0}")]
    InsufficientCoverage(String),

    #[error("training data: {0}")]
    Training(String),

    #[error("segmenter contract violation: expected step {expected}, got {got}")]
    OutOfOrder { expected: u64, got: u64 },

    #[error("session already stopped")]
    SessionStopped,

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn validation(
        trace_id: &str,
        field: &'static str,
        reason: impl Into<String>,
    ) -> Self {
        Error::Validation {
            trace_id: trace_id.to_string(),
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
