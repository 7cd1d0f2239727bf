//! CLI error type and the exit-code contract: 0 success, 2 usage or
//! configuration error, 3 missing or stale prerequisite artifact, 4 data
//! error while processing.

use std::path::PathBuf;

use archminer_core::CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags or an unusable configuration file.
    #[error("{0}")]
    Usage(String),

    /// A prerequisite artifact is absent; the message names the subcommand
    /// that produces it.
    #[error("missing artifact {}; run `archminer {producer}` first", path.display())]
    MissingArtifact { path: PathBuf, producer: &'static str },

    /// A prerequisite artifact exists but no longer matches its producer's
    /// manifest (for example, a vectorizer changed after training).
    #[error("{path} is stale: {reason}; rerun `archminer {producer}`")]
    StaleArtifact {
        path: String,
        producer: &'static str,
        reason: String,
    },

    /// Anything wrong with the data itself.
    #[error("{0}")]
    Data(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::MissingArtifact { .. } | CliError::StaleArtifact { .. } => 3,
            CliError::Data(_) | CliError::Io { .. } => 4,
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        CliError::Usage(message.into())
    }

    pub fn data(message: impl Into<String>) -> Self {
        CliError::Data(message.into())
    }

    /// For stream I/O (stdin/stdout) where there is no path to blame.
    pub fn from_io(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
