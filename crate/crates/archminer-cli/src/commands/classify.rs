//! `classify`: score every tokenized post with a trained model and write
//! the ranked prediction list. Refuses to run against a vectorizer that
//! changed since the model was trained.

use archminer_core::classifiers::{self, Algorithm};
use archminer_core::features::Vectorizer;
use archminer_core::preprocess::read_token_cache;
use archminer_core::sha256_hex;

use crate::artifacts;
use crate::config::ResolvedConfig;
use crate::data::{write_predictions, Prediction};
use crate::error::{CliError, Result};
use crate::manifest::{load_manifest, ManifestBuilder};

pub fn run(
    resolved: &ResolvedConfig,
    epoch: Option<u64>,
    algorithm: Algorithm,
    threshold_flag: Option<f64>,
) -> Result<()> {
    let cfg = &resolved.config;
    let out = &resolved.out_dir;

    let mut builder = ManifestBuilder::new(
        "classify",
        resolved.seed(),
        resolved.config_hash.clone(),
        epoch,
    );

    let token_bytes = builder.require_input(out, artifacts::TOKENS, "ingest")?;
    let docs = read_token_cache(token_bytes.as_slice())?;

    let vec_json = builder.require_input(out, artifacts::VECTORIZER, "vectorize")?;
    let model_name = artifacts::model_file(algorithm);
    let model_json = builder.require_input(out, &model_name, "train")?;
    let model = classifiers::ClassifierModel::from_json(std::str::from_utf8(&model_json)
        .map_err(|e| CliError::data(format!("{model_name}: {e}")))?)?;
    if model.algorithm != algorithm {
        return Err(CliError::data(format!(
            "{model_name} holds a {} model, not {}",
            model.algorithm.name(),
            algorithm.name()
        )));
    }

    // The model is only meaningful in the feature space it was trained in:
    // compare the current vectorizer against the one the train run recorded.
    let train_manifest = load_manifest(out, "train", "train")?;
    if let Some(recorded) = train_manifest.inputs.get(artifacts::VECTORIZER) {
        if *recorded != sha256_hex(&vec_json) {
            return Err(CliError::StaleArtifact {
                path: model_name,
                producer: "train",
                reason: "the vectorizer was refit after this model was trained".to_string(),
            });
        }
    }

    let vectorizer = Vectorizer::from_json(std::str::from_utf8(&vec_json)
        .map_err(|e| CliError::data(format!("{}: {e}", artifacts::VECTORIZER)))?)?;

    let mut predictions: Vec<Prediction> = docs
        .iter()
        .map(|doc| {
            let (label, score) = classifiers::predict(&model, &vectorizer.transform(doc));
            Prediction {
                post_id: doc.post_id,
                score,
                label,
            }
        })
        .collect();
    predictions.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .expect("scores are finite")
            .then_with(|| a.post_id.get().cmp(&b.post_id.get()))
    });

    let threshold = threshold_flag.or(cfg.score_threshold);
    if let Some(t) = threshold {
        predictions.retain(|p| p.score >= t);
    }

    let positive = predictions.iter().filter(|p| p.label).count();
    let bytes = write_predictions(&predictions)?;
    builder.write_output(out, artifacts::PREDICTIONS, &bytes)?;
    builder.finish(out)?;

    match threshold {
        Some(t) => println!(
            "{} scored {} posts at or above {t}; {} labeled positive",
            algorithm.name(),
            predictions.len(),
            positive
        ),
        None => println!(
            "{} scored {} posts; {} labeled positive",
            algorithm.name(),
            predictions.len(),
            positive
        ),
    }
    Ok(())
}
