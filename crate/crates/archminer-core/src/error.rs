//! Error types shared across the pipeline.

use thiserror::Error;

/// Errors surfaced by the core pipeline modules.
#[derive(Debug, Error)]
pub enum CoreError {
    /// A dump row or line could not be parsed in the declared format.
    #[error("malformed input at {location}: {message}")]
    MalformedInput { location: String, message: String },

    /// A document reduced to zero tokens after preprocessing.
    #[error("document {post_id} reduced to zero tokens")]
    EmptyDocument { post_id: u64 },

    /// No term survived the embedding min-count cutoff.
    #[error("no term survived min_count; vocabulary is empty")]
    EmptyVocabulary,

    /// A term was queried that is not in the embedding vocabulary.
    #[error("term not in vocabulary: {0:?}")]
    UnknownTerm(String),

    /// A labeled computation was given labels of a single class (or fewer
    /// than two examples).
    #[error("labels are degenerate: both classes must be present")]
    DegenerateLabels,

    /// Two parallel sequences had different lengths.
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    /// A vectorizer was fitted on an empty corpus.
    #[error("cannot fit on an empty corpus")]
    EmptyCorpus,

    /// An iterative optimizer produced a non-finite loss or weight.
    #[error("optimization diverged to a non-finite value ({context})")]
    NonFiniteLoss { context: String },

    /// The Performance metric was asked for more confirmed posts than mined.
    #[error("confirmed count {confirmed} exceeds total mined {total}")]
    InvalidTotal { confirmed: u64, total: u64 },

    /// A polarity was recorded against an instance id that does not exist.
    #[error("unknown instance id: {0}")]
    UnknownInstance(u64),

    /// A data file (seed lexicon, stop list, baseline, model) failed
    /// validation against its documented shape.
    #[error("invalid data file {path}: {message}")]
    InvalidData { path: String, message: String },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("TOML error: {0}")]
    Toml(#[from] toml::de::Error),
}

impl CoreError {
    /// Helper for malformed-input errors with a line/offset style location.
    pub fn malformed(location: impl Into<String>, message: impl Into<String>) -> Self {
        CoreError::MalformedInput {
            location: location.into(),
            message: message.into(),
        }
    }

    /// Helper for data-file validation errors.
    pub fn invalid_data(path: impl Into<String>, message: impl Into<String>) -> Self {
        CoreError::InvalidData {
            path: path.into(),
            message: message.into(),
        }
    }
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, CoreError>;
