//! `review`: walk an annotator through the positively classified posts,
//! recording confirm/reject verdicts and per-instance polarity judgments.
//!
//! Sessions are resumable: posts this annotator already judged are skipped,
//! and quitting mid-queue saves everything recorded so far. Polarity is
//! only ever set here; nothing in the pipeline assigns it automatically.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::time::{SystemTime, UNIX_EPOCH};

use archminer_core::corpus::Thread;
use archminer_core::evaluation::{self, Verdict, VerdictKind, VerdictLog};
use archminer_core::preprocess::{strip_code, strip_html, thread_text, TokenizedDoc};
use archminer_core::relations::{
    detect_instances, InstanceStore, Polarity, QaAtInstance,
};
use archminer_core::PostId;

use crate::artifacts;
use crate::config::{self, ResolvedConfig};
use crate::data::{self, Prediction};
use crate::error::{CliError, Result};
use crate::manifest::ManifestBuilder;

const EXCERPT_CHARS: usize = 240;

/// Question title plus a single-line plain-text excerpt of the body.
fn excerpt(thread: &Thread) -> String {
    let plain = strip_html(&strip_code(&thread.question.body_html));
    let mut flat = plain.split_whitespace().collect::<Vec<_>>().join(" ");
    if flat.chars().count() > EXCERPT_CHARS {
        flat = flat.chars().take(EXCERPT_CHARS).collect::<String>() + "…";
    }
    flat
}

/// Prompts until one of `options` (or EOF, returned as `None`) comes back.
fn ask<R: BufRead, W: Write>(
    input: &mut R,
    output: &mut W,
    prompt: &str,
    options: &[char],
) -> Result<Option<char>> {
    loop {
        write!(output, "{prompt}").map_err(CliError::from_io)?;
        output.flush().map_err(CliError::from_io)?;
        let mut line = String::new();
        let read = input.read_line(&mut line).map_err(CliError::from_io)?;
        if read == 0 {
            return Ok(None);
        }
        match line.trim().chars().next().map(|c| c.to_ascii_lowercase()) {
            Some(c) if options.contains(&c) => return Ok(Some(c)),
            _ => {
                let listed: Vec<String> = options.iter().map(|c| c.to_string()).collect();
                writeln!(output, "please answer one of: {}", listed.join(", "))
                    .map_err(CliError::from_io)?;
            }
        }
    }
}

fn timestamp(epoch: Option<u64>) -> String {
    epoch
        .unwrap_or_else(|| {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        })
        .to_string()
}

/// Finds the stored id for an instance of this (post, tactic, attribute),
/// appending it when new.
fn ensure_instance(
    store: &mut InstanceStore,
    known: &mut BTreeMap<(u64, String, String), u64>,
    instance: QaAtInstance,
) -> u64 {
    let key = (
        instance.post_id.get(),
        instance.at.as_str().to_string(),
        instance.qa.as_str().to_string(),
    );
    match known.get(&key) {
        Some(&id) => id,
        None => {
            let id = store.append(instance);
            known.insert(key, id);
            id
        }
    }
}

pub fn run<R: BufRead, W: Write>(
    resolved: &ResolvedConfig,
    epoch: Option<u64>,
    annotator: &str,
    limit: Option<usize>,
    input: &mut R,
    output: &mut W,
) -> Result<()> {
    if annotator.trim().is_empty() {
        return Err(CliError::usage("--annotator must not be empty"));
    }
    let cfg = &resolved.config;
    let out = &resolved.out_dir;
    let mut builder = ManifestBuilder::new(
        "review",
        resolved.seed(),
        resolved.config_hash.clone(),
        epoch,
    );

    let prediction_bytes = builder.require_input(out, artifacts::PREDICTIONS, "classify")?;
    let predictions: Vec<Prediction> = {
        let text = std::str::from_utf8(&prediction_bytes)
            .map_err(|e| CliError::data(format!("{}: {e}", artifacts::PREDICTIONS)))?;
        let mut list = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            list.push(serde_json::from_str(line).map_err(|e| {
                CliError::data(format!("prediction line {}: {e}", idx + 1))
            })?);
        }
        list
    };

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

    builder.optional_input(out, artifacts::VERDICTS)?;
    let mut log: VerdictLog = data::load_verdicts(out, true)?;
    builder.optional_input(out, artifacts::INSTANCES)?;
    builder.optional_input(out, artifacts::POLARITY_LOG)?;
    let mut store = data::load_instance_store(out, true)?;
    let mut known: BTreeMap<(u64, String, String), u64> = store
        .stored()
        .map(|s| {
            (
                (
                    s.instance.post_id.get(),
                    s.instance.at.as_str().to_string(),
                    s.instance.qa.as_str().to_string(),
                ),
                s.id,
            )
        })
        .collect();

    let candidates: Vec<&Prediction> = predictions.iter().filter(|p| p.label).collect();
    let queue: Vec<&Prediction> = candidates
        .iter()
        .filter(|p| !log.has_verdict(p.post_id, annotator))
        .copied()
        .collect();
    let total_mined = candidates.len();
    let session_cap = limit.unwrap_or(queue.len()).min(queue.len());

    writeln!(
        output,
        "{} positive predictions; {} already reviewed by {annotator}; {} queued",
        total_mined,
        total_mined - queue.len(),
        session_cap
    )
    .map_err(CliError::from_io)?;

    let mut confirmed = 0usize;
    let mut rejected = 0usize;
    'posts: for (position, prediction) in queue.iter().take(session_cap).enumerate() {
        let id = prediction.post_id.get();
        let thread = threads
            .get(&id)
            .ok_or_else(|| CliError::data(format!("prediction references post {id}, which is not in the corpus")))?;
        let doc = docs
            .get(&id)
            .ok_or_else(|| CliError::data(format!("post {id} has no tokenized document")))?;
        let text = thread_text(thread);
        let instances = detect_instances(doc, &text, &seeds, &dict);

        let title = thread.question.title.as_deref().unwrap_or("(untitled)");
        writeln!(
            output,
            "\n[{}/{}] post {id} (score {:.3}): {title}",
            position + 1,
            session_cap,
            prediction.score
        )
        .map_err(CliError::from_io)?;
        writeln!(output, "  {}", excerpt(thread)).map_err(CliError::from_io)?;
        if instances.is_empty() {
            writeln!(output, "  no tactic-attribute instances detected").map_err(CliError::from_io)?;
        } else {
            writeln!(output, "  detected instances:").map_err(CliError::from_io)?;
            for (i, instance) in instances.iter().enumerate() {
                writeln!(
                    output,
                    "    {}. {} x {} (evidence: \"{}\" + \"{}\")",
                    i + 1,
                    instance.at.as_str(),
                    instance.qa.as_str(),
                    instance.at_evidence.phrase,
                    instance.qa_evidence.phrase
                )
                .map_err(CliError::from_io)?;
            }
        }

        let Some(choice) = ask(
            input,
            output,
            "confirm as a tactic-attribute post? [y]es / [n]o / [q]uit: ",
            &['y', 'n', 'q'],
        )?
        else {
            break;
        };
        match choice {
            'q' => break,
            'n' => {
                log.record(Verdict {
                    post_id: PostId::new(id),
                    verdict: VerdictKind::Rejected,
                    annotator: annotator.to_string(),
                    timestamp: timestamp(epoch),
                })?;
                rejected += 1;
            }
            _ => {
                log.record(Verdict {
                    post_id: PostId::new(id),
                    verdict: VerdictKind::ConfirmedQaAt,
                    annotator: annotator.to_string(),
                    timestamp: timestamp(epoch),
                })?;
                confirmed += 1;
                for instance in instances {
                    let label = format!("{} x {}", instance.at.as_str(), instance.qa.as_str());
                    let instance_id = ensure_instance(&mut store, &mut known, instance);
                    let Some(polarity) = ask(
                        input,
                        output,
                        &format!("  polarity of {label}? [p]ositive / [n]egative / [s]kip: "),
                        &['p', 'n', 's'],
                    )?
                    else {
                        break 'posts;
                    };
                    let polarity = match polarity {
                        'p' => Polarity::Positive,
                        'n' => Polarity::Negative,
                        _ => continue,
                    };
                    store.record_polarity(instance_id, polarity, annotator, &timestamp(epoch))?;
                }
            }
        }
    }

    let mut verdict_bytes = Vec::new();
    log.write_jsonl(&mut verdict_bytes)?;
    builder.write_output(out, artifacts::VERDICTS, &verdict_bytes)?;
    let mut instance_bytes = Vec::new();
    store.write_jsonl(&mut instance_bytes)?;
    builder.write_output(out, artifacts::INSTANCES, &instance_bytes)?;
    let mut history_bytes = Vec::new();
    store.write_history_jsonl(&mut history_bytes)?;
    builder.write_output(out, artifacts::POLARITY_LOG, &history_bytes)?;
    builder.finish(out)?;

    writeln!(
        output,
        "\nsession: {} reviewed ({confirmed} confirmed, {rejected} rejected)",
        confirmed + rejected
    )
    .map_err(CliError::from_io)?;
    let confirmed_total = log.confirmed_posts(cfg.policy).len();
    writeln!(
        output,
        "overall: {} verdicts by {} annotators; {} posts confirmed",
        log.len(),
        log.annotators().len(),
        confirmed_total
    )
    .map_err(CliError::from_io)?;
    if total_mined > 0 {
        let performance = evaluation::performance(confirmed_total as u64, total_mined as u64)?;
        writeln!(
            output,
            "performance: {:.1} ({confirmed_total} of {total_mined} mined posts confirmed)",
            performance
        )
        .map_err(CliError::from_io)?;
    }
    Ok(())
}
