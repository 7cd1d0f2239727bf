//! Core library for mining "quality attribute <-> architecture tactic" (QA-AT)
//! knowledge from developer Q&A corpora.
//!
//! The pipeline has two stages. Stage one turns raw Q&A dumps into trained
//! binary classifiers: [`corpus`] parses and filters threads, [`preprocess`]
//! reduces HTML bodies to stemmed token streams, [`embedding`] trains
//! skip-gram word vectors, [`dictionary`] expands the seed term lexicon into a
//! gain-ratio-weighted semantic network, and [`features`] + [`classifiers`]
//! build dictionary-augmented TF-IDF classifiers. Stage two applies the
//! classifiers and distills the confirmed posts: [`evaluation`] scores
//! predictions and human verdicts, and [`relations`] detects (tactic,
//! attribute) instances, tallies polarity ledgers, and diffs them against a
//! literature baseline.
//!
//! Everything is deterministic given a seed: random number generators are
//! seeded ChaCha streams and all serialized collections iterate in a stable
//! order.

pub mod classifiers;
pub mod corpus;
pub mod dictionary;
pub mod embedding;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod preprocess;
pub mod relations;
pub mod synth;

pub use classifiers::{Algorithm, ClassifierModel, Hyperparams, SplitConfig};
pub use corpus::{CorpusFilter, DumpFormat, ParseMode, Post, PostId, PostKind, Thread};
pub use dictionary::{
    DictEntry, Dictionary, ExpansionConfig, SeedLexicon, SeedPhrase, TermOrigin, WeightedDoc,
};
pub use embedding::{EmbeddingConfig, EmbeddingModel};
pub use error::CoreError;
pub use evaluation::{ConfusionMatrix, Metrics, Verdict, VerdictKind, VerdictLog};
pub use features::{FeatureVector, SelectionRule, Vectorizer};
pub use preprocess::{StopList, TokenizedDoc};
pub use relations::{
    AtName, InstanceStore, InteractionMatrix, LiteratureBaseline, Polarity, PolarityLedger,
    QaAtInstance, QaName,
};
pub use synth::{AblationFixture, LabeledCorpus, SyntheticDump, TwoTopicCorpus};

/// Hex-encoded SHA-256 of a byte slice; the fingerprint primitive used for
/// corpus, model, and artifact identities throughout the pipeline.
pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for byte in digest {
        use std::fmt::Write;
        let _ = write!(out, "{byte:02x}");
    }
    out
}
