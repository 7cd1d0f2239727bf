//! `diff-lit`: compare the polarity ledger against the literature baseline,
//! classifying each polarized tactic-attribute pair as documented,
//! contradicting, or little-known.

use archminer_core::relations::{diff_against_literature, tally_ledger, DiffClass};

use crate::artifacts;
use crate::config::{self, ResolvedConfig};
use crate::data;
use crate::error::Result;
use crate::manifest::ManifestBuilder;

pub fn run(resolved: &ResolvedConfig, epoch: Option<u64>) -> Result<()> {
    let cfg = &resolved.config;
    let out = &resolved.out_dir;
    let mut builder = ManifestBuilder::new(
        "diff-lit",
        resolved.seed(),
        resolved.config_hash.clone(),
        epoch,
    );

    builder.require_input(out, artifacts::INSTANCES, "relate")?;
    builder.optional_input(out, artifacts::POLARITY_LOG)?;
    let store = data::load_instance_store(out, false)?;
    let ledger = tally_ledger(store.instances());

    let baseline = config::load_baseline(cfg)?;
    if let Some(path) = &cfg.paths.baseline {
        let bytes = crate::artifacts::read_input(path)?;
        builder.record_input("baseline", &bytes);
    }

    let report = diff_against_literature(&ledger, &baseline);
    let mut json = report.to_json();
    if !json.ends_with('\n') {
        json.push('\n');
    }
    builder.write_output(out, artifacts::DIFF_JSON, json.as_bytes())?;
    builder.write_output(out, artifacts::DIFF_MD, report.to_markdown().as_bytes())?;
    builder.finish(out)?;

    let count =
        |class: DiffClass| report.entries.iter().filter(|e| e.classification == class).count();
    println!(
        "{} polarized pairs: {} documented, {} contradicting, {} little-known",
        report.entries.len(),
        count(DiffClass::Documented),
        count(DiffClass::Contradicts),
        count(DiffClass::LittleKnown)
    );
    Ok(())
}
