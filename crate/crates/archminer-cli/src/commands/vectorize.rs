//! `vectorize`: fit TF-IDF on the labeled classifier corpus, fold the
//! expansion dictionary into the vocabulary, and narrow the active features
//! by gain ratio. The persisted vectorizer is the single feature space that
//! `train`, `classify`, and `evaluate` share.

use archminer_core::features::{augment_with_dictionary, fit_tfidf, select_features};

use crate::artifacts;
use crate::config::ResolvedConfig;
use crate::data;
use crate::error::{CliError, Result};
use crate::manifest::ManifestBuilder;

pub fn run(resolved: &ResolvedConfig, epoch: Option<u64>) -> Result<()> {
    let cfg = &resolved.config;
    let out = &resolved.out_dir;
    let labels_path = cfg.paths.labels.clone().ok_or_else(|| {
        CliError::usage("vectorize needs ground-truth labels: set paths.labels in the config")
    })?;

    let mut builder = ManifestBuilder::new(
        "vectorize",
        resolved.seed(),
        resolved.config_hash.clone(),
        epoch,
    );

    let labeled = data::require_labeled_docs(&mut builder, out, &labels_path)?;
    let dict_json = builder.require_input(out, artifacts::DICTIONARY, "dict-expand")?;
    let dict = archminer_core::dictionary::Dictionary::from_json(std::str::from_utf8(&dict_json)
        .map_err(|e| CliError::data(format!("{}: {e}", artifacts::DICTIONARY)))?)?;

    let fitted = fit_tfidf(&labeled.docs)?;
    let augmented = augment_with_dictionary(&fitted, &dict);
    let selected = select_features(&augmented, &labeled.docs, &labeled.labels, cfg.selection)?;

    let mut json = selected.to_json();
    if !json.ends_with('\n') {
        json.push('\n');
    }
    builder.write_output(out, artifacts::VECTORIZER, json.as_bytes())?;
    builder.finish(out)?;

    println!(
        "vocabulary of {} terms ({} from the dictionary); {} features selected",
        selected.vocab_len(),
        selected.dictionary_terms().len(),
        selected.selected_count()
    );
    Ok(())
}
