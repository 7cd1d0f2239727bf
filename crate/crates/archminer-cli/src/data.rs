//! Typed loaders for pipeline artifacts. Each loader maps a missing file to
//! an exit-3 error naming the subcommand that produces it, so a pipeline
//! run started in the middle explains how to get unstuck.

use std::collections::BTreeMap;
use std::path::Path;

use archminer_core::classifiers::ClassifierModel;
use archminer_core::corpus::{self, DumpFormat, ParseMode, Thread};
use archminer_core::dictionary::Dictionary;
use archminer_core::embedding::EmbeddingModel;
use archminer_core::evaluation::VerdictLog;
use archminer_core::features::Vectorizer;
use archminer_core::preprocess::{read_token_cache, TokenizedDoc};
use archminer_core::relations::InstanceStore;
use archminer_core::PostId;

use crate::artifacts::{self, read_required, read_required_text};
use crate::error::{CliError, Result};

/// The filtered corpus as threads, rebuilt from the persisted post list.
pub fn load_threads(out_dir: &Path) -> Result<Vec<Thread>> {
    let bytes = read_required(&out_dir.join(artifacts::CORPUS), "ingest")?;
    let (posts, _) = corpus::collect_posts(bytes.as_slice(), DumpFormat::Jsonl, ParseMode::Strict)?;
    let (threads, orphans) = corpus::assemble_threads(posts);
    if !orphans.is_empty() {
        return Err(CliError::data(format!(
            "{} contains {} orphan answers",
            artifacts::CORPUS,
            orphans.len()
        )));
    }
    Ok(threads)
}

pub fn load_tokens(out_dir: &Path, name: &str) -> Result<Vec<TokenizedDoc>> {
    let bytes = read_required(&out_dir.join(name), "ingest")?;
    Ok(read_token_cache(bytes.as_slice())?)
}

pub fn load_embedding(out_dir: &Path) -> Result<EmbeddingModel> {
    let bytes = read_required(&out_dir.join(artifacts::VECTORS), "embed")?;
    Ok(EmbeddingModel::load_binary(bytes.as_slice())?)
}

pub fn load_dictionary(out_dir: &Path) -> Result<Dictionary> {
    let text = read_required_text(&out_dir.join(artifacts::DICTIONARY), "dict-expand")?;
    Ok(Dictionary::from_json(&text)?)
}

pub fn load_vectorizer(out_dir: &Path) -> Result<Vectorizer> {
    let text = read_required_text(&out_dir.join(artifacts::VECTORIZER), "vectorize")?;
    Ok(Vectorizer::from_json(&text)?)
}

pub fn load_model(out_dir: &Path, file_name: &str) -> Result<ClassifierModel> {
    let text = read_required_text(&out_dir.join(file_name), "train")?;
    Ok(ClassifierModel::from_json(&text)?)
}

/// The verdict log; absent file -> empty log when `optional`, else exit 3.
pub fn load_verdicts(out_dir: &Path, optional: bool) -> Result<VerdictLog> {
    let path = out_dir.join(artifacts::VERDICTS);
    if optional && !path.exists() {
        return Ok(VerdictLog::new());
    }
    let bytes = read_required(&path, "review")?;
    Ok(VerdictLog::from_jsonl(bytes.as_slice())?)
}

/// The instance store plus its polarity audit log, when they exist yet.
pub fn load_instance_store(out_dir: &Path, optional: bool) -> Result<InstanceStore> {
    let path = out_dir.join(artifacts::INSTANCES);
    if optional && !path.exists() {
        return Ok(InstanceStore::from_instances(Vec::new()));
    }
    let bytes = read_required(&path, "review")?;
    let mut store = InstanceStore::read_jsonl(bytes.as_slice())?;
    let log_path = out_dir.join(artifacts::POLARITY_LOG);
    if log_path.exists() {
        let log = crate::artifacts::read_input(&log_path)?;
        store.apply_history_jsonl(log.as_slice())?;
    }
    Ok(store)
}

/// One prediction line from `classify`.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct Prediction {
    pub post_id: PostId,
    pub score: f64,
    pub label: bool,
}

pub fn load_predictions(out_dir: &Path) -> Result<Vec<Prediction>> {
    let text = read_required_text(&out_dir.join(artifacts::PREDICTIONS), "classify")?;
    let mut predictions = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let p: Prediction = serde_json::from_str(line)
            .map_err(|e| CliError::data(format!("prediction line {}: {e}", idx + 1)))?;
        predictions.push(p);
    }
    Ok(predictions)
}

pub fn write_predictions(predictions: &[Prediction]) -> Result<Vec<u8>> {
    let mut bytes = Vec::new();
    for p in predictions {
        serde_json::to_writer(&mut bytes, p)?;
        bytes.push(b'\n');
    }
    Ok(bytes)
}

/// Token docs paired with their ground-truth labels, keyed by post id.
/// Unlabeled docs are dropped (and counted) rather than failing the run.
pub struct LabeledDocs {
    pub docs: Vec<TokenizedDoc>,
    pub labels: Vec<bool>,
    pub unlabeled: usize,
}

pub fn load_labeled_docs(out_dir: &Path, labels_path: &Path) -> Result<LabeledDocs> {
    let docs = load_tokens(out_dir, artifacts::TOKENS)?;
    let by_id: BTreeMap<u64, bool> = crate::config::load_labels(labels_path)?;
    align_labels(docs, &by_id)
}

/// Reads the classifier token cache and the labels file, recording both in
/// the manifest, and pairs them up.
pub fn require_labeled_docs(
    builder: &mut crate::manifest::ManifestBuilder,
    out_dir: &Path,
    labels_path: &Path,
) -> Result<LabeledDocs> {
    let token_bytes = builder.require_input(out_dir, artifacts::TOKENS, "ingest")?;
    let docs = read_token_cache(token_bytes.as_slice())?;
    let label_bytes = artifacts::read_input(labels_path)?;
    builder.record_input("labels", &label_bytes);
    let by_id = crate::config::load_labels(labels_path)?;
    let labeled = align_labels(docs, &by_id)?;
    if labeled.unlabeled > 0 {
        log::warn!(
            "{} tokenized posts have no ground-truth label and are left out of training",
            labeled.unlabeled
        );
    }
    Ok(labeled)
}

/// Pairs docs with their labels by post id; docs without a label are
/// dropped and counted. Errors when nothing matches at all.
pub fn align_labels(docs: Vec<TokenizedDoc>, by_id: &BTreeMap<u64, bool>) -> Result<LabeledDocs> {
    let mut kept = Vec::new();
    let mut labels = Vec::new();
    let mut unlabeled = 0usize;
    for doc in docs {
        match by_id.get(&doc.post_id.get()) {
            Some(&label) => {
                kept.push(doc);
                labels.push(label);
            }
            None => unlabeled += 1,
        }
    }
    if kept.is_empty() {
        return Err(CliError::data(
            "no tokenized posts matched the ground-truth labels".to_string(),
        ));
    }
    Ok(LabeledDocs {
        docs: kept,
        labels,
        unlabeled,
    })
}
