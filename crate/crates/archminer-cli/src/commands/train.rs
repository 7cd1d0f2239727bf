//! `train`: split the labeled corpus and fit one or more classifiers in the
//! persisted feature space. Each model file carries a fingerprint of its
//! training inputs, which `classify` and `evaluate` check before trusting
//! the model.

use archminer_core::classifiers::{self, Algorithm};
use archminer_core::features::Vectorizer;

use crate::artifacts;
use crate::config::ResolvedConfig;
use crate::data;
use crate::error::{CliError, Result};
use crate::manifest::ManifestBuilder;

pub fn run(resolved: &ResolvedConfig, epoch: Option<u64>, algorithms: &[Algorithm]) -> Result<()> {
    let cfg = &resolved.config;
    let out = &resolved.out_dir;
    let labels_path = cfg.paths.labels.clone().ok_or_else(|| {
        CliError::usage("train needs ground-truth labels: set paths.labels in the config")
    })?;

    let mut builder = ManifestBuilder::new(
        "train",
        resolved.seed(),
        resolved.config_hash.clone(),
        epoch,
    );

    let labeled = data::require_labeled_docs(&mut builder, out, &labels_path)?;
    let vec_json = builder.require_input(out, artifacts::VECTORIZER, "vectorize")?;
    let vectorizer = Vectorizer::from_json(std::str::from_utf8(&vec_json)
        .map_err(|e| CliError::data(format!("{}: {e}", artifacts::VECTORIZER)))?)?;

    let examples = vectorizer.transform_labeled(&labeled.docs, &labeled.labels)?;
    let (train_set, test_set) = classifiers::split_train_test(examples, &cfg.split)?;

    for &algorithm in algorithms {
        let model = classifiers::train(algorithm, &train_set, &cfg.hyperparams, cfg.seed)?;
        let mut json = model.to_json();
        if !json.ends_with('\n') {
            json.push('\n');
        }
        builder.write_output(out, &artifacts::model_file(algorithm), json.as_bytes())?;
        println!(
            "trained {} on {} examples ({} held out)",
            algorithm.name(),
            train_set.len(),
            test_set.len()
        );
    }
    builder.finish(out)?;
    Ok(())
}
