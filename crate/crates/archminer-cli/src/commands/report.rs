//! `report`: consolidate every artifact present in the output directory
//! into a single markdown report. Only the ingest stats are mandatory;
//! sections whose artifacts are missing say which subcommand adds them.

use std::fmt::Write as _;

use archminer_core::evaluation::{self, VerdictLog};

use crate::artifacts;
use crate::commands::ingest::IngestStats;
use crate::config::ResolvedConfig;
use crate::data::Prediction;
use crate::error::{CliError, Result};
use crate::manifest::ManifestBuilder;

/// Renders comma-separated rows (none of our cells contain commas) as a
/// markdown table.
fn csv_to_markdown(csv: &str) -> String {
    let mut out = String::new();
    for (row, line) in csv.lines().enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        out.push_str("| ");
        out.push_str(&cells.join(" | "));
        out.push_str(" |\n");
        if row == 0 {
            out.push_str(&"|---".repeat(cells.len()));
            out.push_str("|\n");
        }
    }
    out
}

fn missing(section: &mut String, subcommand: &str) {
    let _ = writeln!(section, "_Not available yet: run `archminer {subcommand}`._\n");
}

pub fn run(resolved: &ResolvedConfig, epoch: Option<u64>) -> Result<()> {
    let out = &resolved.out_dir;
    let mut builder = ManifestBuilder::new(
        "report",
        resolved.seed(),
        resolved.config_hash.clone(),
        epoch,
    );

    let mut md = String::from("# Mining report\n\n");
    let _ = writeln!(md, "Seed {}; configuration {}.\n", resolved.seed(), resolved.config_hash);

    // Corpus.
    md.push_str("## Corpus\n\n");
    let stats_bytes = builder.require_input(out, artifacts::INGEST_STATS, "ingest")?;
    let stats: IngestStats = serde_json::from_slice(&stats_bytes)
        .map_err(|e| CliError::data(format!("{}: {e}", artifacts::INGEST_STATS)))?;
    let _ = writeln!(
        md,
        "- {} posts parsed ({} questions, {} answers); {} malformed rows; {} orphan answers",
        stats.posts_parsed, stats.questions, stats.answers, stats.malformed_rows, stats.orphan_answers
    );
    let _ = writeln!(
        md,
        "- classifier corpus: {} of {} threads kept ({} empty after preprocessing)",
        stats.classifier_corpus.threads_out,
        stats.classifier_corpus.threads_in,
        stats.classifier_corpus.empty_docs_skipped
    );
    let _ = writeln!(
        md,
        "- dictionary corpus: {} of {} threads kept ({} with code blocks dropped)\n",
        stats.dictionary_corpus.threads_out,
        stats.dictionary_corpus.threads_in,
        stats.dictionary_corpus.dropped_code_in_question
    );

    // Classifier metrics.
    md.push_str("## Classifier metrics\n\n");
    match builder.optional_input(out, artifacts::METRICS_MD)? {
        Some(bytes) => {
            md.push_str(std::str::from_utf8(&bytes).unwrap_or_default());
            md.push('\n');
        }
        None => missing(&mut md, "evaluate"),
    }

    // Ablation.
    md.push_str("## Dictionary ablation\n\n");
    match builder.optional_input(out, artifacts::ABLATION_MD)? {
        Some(bytes) => {
            md.push_str(std::str::from_utf8(&bytes).unwrap_or_default());
            md.push('\n');
        }
        None => missing(&mut md, "evaluate --ablation"),
    }

    // Review progress.
    md.push_str("## Review\n\n");
    match builder.optional_input(out, artifacts::VERDICTS)? {
        Some(bytes) => {
            let log = VerdictLog::from_jsonl(bytes.as_slice())?;
            let confirmed = log.confirmed_posts(resolved.config.policy).len();
            let annotators: Vec<String> =
                log.annotators().iter().map(|a| a.to_string()).collect();
            let _ = writeln!(
                md,
                "- {} verdicts by {} annotator(s): {}",
                log.len(),
                annotators.len(),
                annotators.join(", ")
            );
            let _ = writeln!(md, "- {confirmed} posts confirmed");
            if let Some(predictions) = builder.optional_input(out, artifacts::PREDICTIONS)? {
                let mined = std::str::from_utf8(&predictions)
                    .unwrap_or_default()
                    .lines()
                    .filter(|l| !l.trim().is_empty())
                    .filter_map(|l| serde_json::from_str::<Prediction>(l).ok())
                    .filter(|p| p.label)
                    .count();
                if mined > 0 {
                    let performance = evaluation::performance(confirmed as u64, mined as u64)?;
                    let _ = writeln!(
                        md,
                        "- performance: {:.1} ({confirmed} of {mined} mined posts confirmed)",
                        performance
                    );
                }
            }
            md.push('\n');
        }
        None => missing(&mut md, "review --annotator <name>"),
    }

    // Agreement.
    md.push_str("## Inter-annotator agreement\n\n");
    match builder.optional_input(out, artifacts::KAPPA_JSON)? {
        Some(bytes) => {
            let value: serde_json::Value = serde_json::from_slice(&bytes)?;
            let _ = writeln!(
                md,
                "- kappa({}, {}) over {} posts: {:.3}\n",
                value["annotator_a"].as_str().unwrap_or("?"),
                value["annotator_b"].as_str().unwrap_or("?"),
                value["common_posts"].as_u64().unwrap_or(0),
                value["kappa"].as_f64().unwrap_or(f64::NAN)
            );
        }
        None => missing(&mut md, "evaluate --kappa <a> <b>"),
    }

    // Interaction matrix.
    md.push_str("## Interaction matrix\n\n");
    match builder.optional_input(out, artifacts::MATRIX_CSV)? {
        Some(bytes) => {
            md.push_str(&csv_to_markdown(std::str::from_utf8(&bytes).unwrap_or_default()));
            md.push('\n');
        }
        None => missing(&mut md, "relate"),
    }

    // Polarity ledger.
    md.push_str("## Polarity ledger\n\n");
    match builder.optional_input(out, artifacts::LEDGER_CSV)? {
        Some(bytes) => {
            md.push_str(&csv_to_markdown(std::str::from_utf8(&bytes).unwrap_or_default()));
            md.push('\n');
        }
        None => missing(&mut md, "relate"),
    }

    // Literature diff.
    md.push_str("## Literature comparison\n\n");
    match builder.optional_input(out, artifacts::DIFF_MD)? {
        Some(bytes) => {
            md.push_str(std::str::from_utf8(&bytes).unwrap_or_default());
            md.push('\n');
        }
        None => missing(&mut md, "diff-lit"),
    }

    builder.write_output(out, artifacts::REPORT_MD, md.as_bytes())?;
    builder.finish(out)?;

    println!("wrote {}", out.join(artifacts::REPORT_MD).display());
    Ok(())
}
