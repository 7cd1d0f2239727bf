//! `relate`: detect tactic-attribute instances in every confirmed post and
//! tabulate them into the interaction matrix and the polarity ledger.
//!
//! Confirmation comes solely from review verdicts; this command never
//! invents polarity, it only tallies what annotators recorded.

use std::collections::{BTreeMap, BTreeSet};

use archminer_core::corpus::Thread;
use archminer_core::preprocess::{thread_text, TokenizedDoc};
use archminer_core::relations::{build_matrix, detect_instances, tally_ledger};

use crate::artifacts;
use crate::config::{self, ResolvedConfig};
use crate::data;
use crate::error::{CliError, Result};
use crate::manifest::ManifestBuilder;

pub fn run(resolved: &ResolvedConfig, epoch: Option<u64>) -> Result<()> {
    let cfg = &resolved.config;
    let out = &resolved.out_dir;
    let mut builder = ManifestBuilder::new(
        "relate",
        resolved.seed(),
        resolved.config_hash.clone(),
        epoch,
    );

    let verdict_bytes = builder.require_input(out, artifacts::VERDICTS, "review")?;
    let log = archminer_core::evaluation::VerdictLog::from_jsonl(verdict_bytes.as_slice())?;
    let confirmed = log.confirmed_posts(cfg.policy);

    builder.require_input(out, artifacts::CORPUS, "ingest")?;
    let threads: BTreeMap<u64, Thread> = data::load_threads(out)?
        .into_iter()
        .map(|t| (t.question.id.get(), t))
        .collect();
    builder.require_input(out, artifacts::TOKENS, "ingest")?;
    let docs: BTreeMap<u64, TokenizedDoc> = data::load_tokens(out, artifacts::TOKENS)?
        .into_iter()
        .map(|d| (d.post_id.get(), d))
        .collect();
    builder.require_input(out, artifacts::DICTIONARY, "dict-expand")?;
    let dict = data::load_dictionary(out)?;
    let seeds = config::load_seeds(cfg)?;

    builder.optional_input(out, artifacts::INSTANCES)?;
    builder.optional_input(out, artifacts::POLARITY_LOG)?;
    let mut store = data::load_instance_store(out, true)?;
    let known: BTreeSet<(u64, String, String)> = store
        .instances()
        .map(|i| (i.post_id.get(), i.at.as_str().to_string(), i.qa.as_str().to_string()))
        .collect();

    for post_id in &confirmed {
        let id = post_id.get();
        let thread = threads.get(&id).ok_or_else(|| {
            CliError::data(format!("confirmed post {id} is not in the corpus"))
        })?;
        let doc = docs
            .get(&id)
            .ok_or_else(|| CliError::data(format!("post {id} has no tokenized document")))?;
        let text = thread_text(thread);
        for instance in detect_instances(doc, &text, &seeds, &dict) {
            let key = (id, instance.at.as_str().to_string(), instance.qa.as_str().to_string());
            if !known.contains(&key) {
                store.append(instance);
            }
        }
    }

    // The matrix and ledger only count instances from confirmed posts, even
    // if the store carries detections for posts later rejected.
    let confirmed_ids: BTreeSet<u64> = confirmed.iter().map(|p| p.get()).collect();
    let counted: Vec<_> = store
        .instances()
        .filter(|i| confirmed_ids.contains(&i.post_id.get()))
        .cloned()
        .collect();
    let matrix = build_matrix(counted.iter());
    let ledger = tally_ledger(counted.iter());

    let mut instance_bytes = Vec::new();
    store.write_jsonl(&mut instance_bytes)?;
    builder.write_output(out, artifacts::INSTANCES, &instance_bytes)?;
    builder.write_output(out, artifacts::MATRIX_CSV, matrix.to_csv().as_bytes())?;
    builder.write_output(out, artifacts::LEDGER_CSV, ledger.to_csv().as_bytes())?;
    builder.finish(out)?;

    println!(
        "{} confirmed posts yield {} instances ({} with recorded polarity)",
        confirmed.len(),
        matrix.total(),
        ledger.total()
    );
    Ok(())
}
