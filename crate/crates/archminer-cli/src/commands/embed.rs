//! `embed`: train skip-gram word vectors on the classifier token cache.
//!
//! The full (non-noun-filtered) corpus is used so the vectors see every
//! context word; dictionary expansion later restricts its *candidates* to
//! the noun-filtered corpus, not the embedding contexts.

use archminer_core::embedding;
use archminer_core::preprocess::read_token_cache;

use crate::artifacts;
use crate::config::ResolvedConfig;
use crate::error::Result;
use crate::manifest::ManifestBuilder;

pub fn run(resolved: &ResolvedConfig, epoch: Option<u64>) -> Result<()> {
    let out = &resolved.out_dir;
    let mut builder = ManifestBuilder::new(
        "embed",
        resolved.seed(),
        resolved.config_hash.clone(),
        epoch,
    );

    let token_bytes = builder.require_input(out, artifacts::TOKENS, "ingest")?;
    let docs = read_token_cache(token_bytes.as_slice())?;

    let model = embedding::train_skipgram(&docs, &resolved.config.embedding)?;
    let mut bytes = Vec::new();
    model.save_binary(&mut bytes)?;
    builder.write_output(out, artifacts::VECTORS, &bytes)?;
    builder.finish(out)?;

    println!(
        "trained {}-dimensional vectors for {} terms over {} documents",
        resolved.config.embedding.dim,
        model.len(),
        docs.len()
    );
    Ok(())
}
