use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("history tweet {tweet_id} also appears in the labeled dataset")]
    Disjointness { tweet_id: String },

    #[error(
        "history tweet {tweet_id} (t={timestamp}) is not strictly before anchor {anchor_id} (t={anchor_timestamp})"
    )]
    Ordering {
        tweet_id: String,
        timestamp: i64,
        anchor_id: String,
        anchor_timestamp: i64,
    },

    #[error("history references anchor {0} which is not in the dataset")]
    Reference(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("stratification error: {0}")]
    Stratification(String),

    #[error("alignment error: {0}")]
    Alignment(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("training diverged at epoch {epoch}, batch {batch}: loss = {loss}")]
    NonFiniteLoss { epoch: usize, batch: usize, loss: f64 },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    /// Usage and configuration problems are distinguished from data and
    /// runtime failures so the binary can map them to separate exit codes.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::Config(_))
    }
}
