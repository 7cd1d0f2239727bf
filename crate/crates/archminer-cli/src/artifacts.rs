//! Canonical artifact names inside the output directory, plus the shared
//! file plumbing: atomic writes and prerequisite-aware reads whose errors
//! name the subcommand that produces the missing file.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use archminer_core::classifiers::Algorithm;

use crate::error::{CliError, Result};

pub const CORPUS: &str = "corpus.jsonl";
pub const INGEST_STATS: &str = "ingest_stats.json";
pub const TOKENS: &str = "tokens.jsonl";
pub const DICT_TOKENS: &str = "dict_tokens.jsonl";
pub const VECTORS: &str = "vectors.bin";
pub const DICTIONARY: &str = "dictionary.json";
pub const VECTORIZER: &str = "vectorizer.json";
pub const PREDICTIONS: &str = "predictions.jsonl";
pub const METRICS_JSON: &str = "metrics.json";
pub const METRICS_MD: &str = "metrics.md";
pub const ABLATION_JSON: &str = "ablation.json";
pub const ABLATION_MD: &str = "ablation.md";
pub const KAPPA_JSON: &str = "kappa.json";
pub const VERDICTS: &str = "verdicts.jsonl";
pub const INSTANCES: &str = "instances.jsonl";
pub const POLARITY_LOG: &str = "polarity_log.jsonl";
pub const MATRIX_CSV: &str = "matrix.csv";
pub const LEDGER_CSV: &str = "ledger.csv";
pub const DIFF_JSON: &str = "diff.json";
pub const DIFF_MD: &str = "diff.md";
pub const NETWORK_GEXF: &str = "network.gexf";
pub const NETWORK_DOT: &str = "network.dot";
pub const REPORT_MD: &str = "report.md";

pub fn model_file(algorithm: Algorithm) -> String {
    format!("model-{}.json", algorithm.name())
}

fn io_err(path: &Path, source: io::Error) -> CliError {
    CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes via a temporary file in the same directory plus a rename, so
/// readers never observe a half-written artifact.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut temp = tempname(path);
    let mut attempt = 0;
    while temp.exists() {
        attempt += 1;
        temp = path.with_extension(format!("tmp{attempt}"));
    }
    fs::write(&temp, bytes).map_err(|e| io_err(&temp, e))?;
    fs::rename(&temp, path).map_err(|e| io_err(path, e))
}

fn tempname(path: &Path) -> PathBuf {
    path.with_extension("tmp")
}

/// Reads a prerequisite artifact; a missing file becomes an exit-3 error
/// naming its producer.
pub fn read_required(path: &Path, producer: &'static str) -> Result<Vec<u8>> {
    match fs::read(path) {
        Ok(bytes) => Ok(bytes),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Err(CliError::MissingArtifact {
            path: path.to_path_buf(),
            producer,
        }),
        Err(e) => Err(io_err(path, e)),
    }
}

/// Like [`read_required`] for UTF-8 text artifacts.
pub fn read_required_text(path: &Path, producer: &'static str) -> Result<String> {
    let bytes = read_required(path, producer)?;
    String::from_utf8(bytes)
        .map_err(|_| CliError::data(format!("{} is not valid UTF-8", path.display())))
}

/// Reads a plain input file (one named by the configuration, not produced
/// by a subcommand).
pub fn read_input(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| io_err(path, e))
}
