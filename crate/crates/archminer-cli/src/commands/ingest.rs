//! `ingest`: parse a Q&A dump, assemble and filter threads, and write the
//! corpus plus the two token caches every later stage reads.
//!
//! Two corpora come out of one dump. The classifier corpus applies the
//! configured filter as-is and is tokenized without the noun filter; the
//! dictionary corpus additionally drops questions containing code blocks
//! and keeps only nouns, which is what dictionary expansion trains on.

use std::path::Path;

use archminer_core::corpus::{self, CorpusFilter, Thread};
use archminer_core::error::CoreError;
use archminer_core::preprocess::{self, contains_code_block, PreprocessOptions, StopList};
use log::warn;
use serde::{Deserialize, Serialize};

use crate::artifacts;
use crate::config::{self, ResolvedConfig};
use crate::error::{CliError, Result};
use crate::manifest::ManifestBuilder;

/// Per-corpus filter accounting. Criterion counts are independent: a
/// thread failing two criteria is counted under both.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterStats {
    pub threads_in: u64,
    pub dropped_min_answers: u64,
    pub dropped_nonpositive_score: u64,
    pub dropped_missing_tags: u64,
    pub dropped_code_in_question: u64,
    pub threads_out: u64,
    /// Threads whose pipeline output was empty (e.g. all-stopword posts).
    pub empty_docs_skipped: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestStats {
    pub posts_parsed: u64,
    pub malformed_rows: u64,
    pub questions: u64,
    pub answers: u64,
    pub orphan_answers: u64,
    pub classifier_corpus: FilterStats,
    pub dictionary_corpus: FilterStats,
}

fn drop_counts(threads: &[Thread], filter: &CorpusFilter) -> FilterStats {
    let mut stats = FilterStats {
        threads_in: threads.len() as u64,
        ..FilterStats::default()
    };
    for thread in threads {
        if (thread.answers.len() as u32) < filter.min_answers {
            stats.dropped_min_answers += 1;
        }
        if filter.require_positive_score && thread.question.score <= 0 {
            stats.dropped_nonpositive_score += 1;
        }
        if let Some(required) = &filter.required_tags {
            if !thread.question.tags.iter().any(|tag| required.contains(tag)) {
                stats.dropped_missing_tags += 1;
            }
        }
        if filter.exclude_code_in_question && contains_code_block(&thread.question.body_html) {
            stats.dropped_code_in_question += 1;
        }
    }
    stats
}

/// Tokenizes threads, skipping (and counting) those that come out empty.
fn tokenize_threads(
    threads: &[Thread],
    stoplist: &StopList,
    options: &PreprocessOptions,
    stats: &mut FilterStats,
) -> Result<Vec<u8>> {
    let mut docs = Vec::new();
    for thread in threads {
        match preprocess::preprocess_thread(thread, stoplist, options) {
            Ok(doc) => docs.push(doc),
            Err(CoreError::EmptyDocument { post_id }) => {
                stats.empty_docs_skipped += 1;
                warn!("post {post_id}: no tokens survive preprocessing; skipped");
            }
            Err(e) => return Err(e.into()),
        }
    }
    let mut bytes = Vec::new();
    preprocess::write_token_cache(&docs, &mut bytes)?;
    Ok(bytes)
}

pub fn run(
    resolved: &ResolvedConfig,
    epoch: Option<u64>,
    dump_override: Option<&Path>,
) -> Result<()> {
    let cfg = &resolved.config;
    let dump_path = match dump_override.or(cfg.paths.dump.as_deref()) {
        Some(path) => path.to_path_buf(),
        None => {
            return Err(CliError::usage(
                "no dump file: pass --dump <file> or set paths.dump in the config",
            ))
        }
    };

    let mut builder = ManifestBuilder::new(
        "ingest",
        resolved.seed(),
        resolved.config_hash.clone(),
        epoch,
    );
    let dump_bytes = artifacts::read_input(&dump_path)?;
    builder.record_input("dump", &dump_bytes);

    let (posts, malformed) = corpus::collect_posts(
        dump_bytes.as_slice(),
        cfg.format.into(),
        resolved.parse_mode(),
    )?;
    for err in &malformed {
        warn!("skipped malformed row: {err}");
    }
    let mut stats = IngestStats {
        posts_parsed: posts.len() as u64,
        malformed_rows: malformed.len() as u64,
        ..IngestStats::default()
    };
    stats.questions = posts
        .iter()
        .filter(|p| p.kind == corpus::PostKind::Question)
        .count() as u64;
    stats.answers = stats.posts_parsed - stats.questions;

    let (threads, orphans) = corpus::assemble_threads(posts);
    stats.orphan_answers = orphans.len() as u64;
    if !orphans.is_empty() {
        warn!("{} answers reference questions missing from the dump", orphans.len());
    }

    let classifier_filter = cfg.filter.clone();
    let mut dictionary_filter = cfg.filter.clone();
    dictionary_filter.exclude_code_in_question = true;

    stats.classifier_corpus = drop_counts(&threads, &classifier_filter);
    stats.dictionary_corpus = drop_counts(&threads, &dictionary_filter);

    let classifier_threads = corpus::filter_threads(threads.clone(), &classifier_filter);
    let dictionary_threads = corpus::filter_threads(threads, &dictionary_filter);
    stats.classifier_corpus.threads_out = classifier_threads.len() as u64;
    stats.dictionary_corpus.threads_out = dictionary_threads.len() as u64;
    if classifier_threads.is_empty() {
        warn!("no threads pass the corpus filter; downstream stages will have nothing to do");
    }

    let stoplist = config::load_stoplist(cfg)?;
    let nouns = config::load_noun_lexicon(cfg)?;

    let mut corpus_bytes = Vec::new();
    corpus::write_posts_jsonl(&corpus::threads_to_posts(&classifier_threads), &mut corpus_bytes)?;

    let token_bytes = tokenize_threads(
        &classifier_threads,
        &stoplist,
        &PreprocessOptions::default(),
        &mut stats.classifier_corpus,
    )?;
    let dict_token_bytes = tokenize_threads(
        &dictionary_threads,
        &stoplist,
        &PreprocessOptions {
            noun_lexicon: Some(nouns),
        },
        &mut stats.dictionary_corpus,
    )?;

    let out = &resolved.out_dir;
    builder.write_output(out, artifacts::CORPUS, &corpus_bytes)?;
    builder.write_output(out, artifacts::TOKENS, &token_bytes)?;
    builder.write_output(out, artifacts::DICT_TOKENS, &dict_token_bytes)?;

    let mut stats_json = serde_json::to_string_pretty(&stats)?;
    stats_json.push('\n');
    builder.write_output(out, artifacts::INGEST_STATS, stats_json.as_bytes())?;
    builder.finish(out)?;

    println!(
        "ingested {} posts ({} questions, {} answers, {} malformed rows, {} orphans)",
        stats.posts_parsed, stats.questions, stats.answers, stats.malformed_rows, stats.orphan_answers
    );
    println!(
        "classifier corpus: {} of {} threads kept; dictionary corpus: {} kept",
        stats.classifier_corpus.threads_out,
        stats.classifier_corpus.threads_in,
        stats.dictionary_corpus.threads_out
    );
    Ok(())
}
