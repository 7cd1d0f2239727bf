//! `dict-expand`: grow the seed lexicon into the expansion dictionary.
//!
//! Candidates come from the noun-filtered dictionary corpus; vector
//! similarity comes from the trained embedding; the gain-ratio gate is
//! grounded on the labeled classifier corpus. The result is the dictionary
//! both `vectorize` and instance detection consume.

use archminer_core::dictionary;
use archminer_core::embedding::EmbeddingModel;
use archminer_core::features::fit_tfidf;
use archminer_core::preprocess::read_token_cache;

use crate::artifacts;
use crate::config::{self, ResolvedConfig};
use crate::data;
use crate::error::{CliError, Result};
use crate::manifest::ManifestBuilder;

pub fn run(resolved: &ResolvedConfig, epoch: Option<u64>) -> Result<()> {
    let cfg = &resolved.config;
    let out = &resolved.out_dir;
    let labels_path = cfg.paths.labels.clone().ok_or_else(|| {
        CliError::usage("dict-expand needs ground-truth labels: set paths.labels in the config")
    })?;

    let mut builder = ManifestBuilder::new(
        "dict-expand",
        resolved.seed(),
        resolved.config_hash.clone(),
        epoch,
    );

    let dict_bytes = builder.require_input(out, artifacts::DICT_TOKENS, "ingest")?;
    let dict_docs = read_token_cache(dict_bytes.as_slice())?;
    let labeled = data::require_labeled_docs(&mut builder, out, &labels_path)?;

    let vector_bytes = builder.require_input(out, artifacts::VECTORS, "embed")?;
    let model = EmbeddingModel::load_binary(vector_bytes.as_slice())?;

    let seeds = config::load_seeds(cfg)?;
    if let Some(path) = &cfg.paths.seeds {
        let bytes = artifacts::read_input(path)?;
        builder.record_input("seeds", &bytes);
    }

    let vectorizer = fit_tfidf(&dict_docs)?;
    let dict = dictionary::expand_dictionary(
        &seeds,
        &model,
        &dict_docs,
        &labeled.docs,
        &labeled.labels,
        &vectorizer,
        &cfg.expansion,
    )?;

    let mut json = dict.to_json();
    if !json.ends_with('\n') {
        json.push('\n');
    }
    builder.write_output(out, artifacts::DICTIONARY, json.as_bytes())?;
    builder.finish(out)?;

    let expanded = dict.expanded_terms().count();
    println!(
        "dictionary holds {} terms ({} seeds, {} expanded) and {} similarity edges",
        dict.len(),
        dict.len() - expanded,
        expanded,
        dict.edges().len()
    );
    Ok(())
}
