//! Pipeline configuration: one TOML file holding paths, filters, and the
//! per-stage settings, with a global seed that fills in any sub-seed the
//! file leaves unset. Relative paths resolve against the config file's
//! directory, so a config travels with its fixtures.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use archminer_core::classifiers::{Hyperparams, SplitConfig};
use archminer_core::corpus::{CorpusFilter, DumpFormat, ParseMode};
use archminer_core::dictionary::ExpansionConfig;
use archminer_core::embedding::EmbeddingConfig;
use archminer_core::evaluation::ConfirmationPolicy;
use archminer_core::features::SelectionRule;
use archminer_core::sha256_hex;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_OUT_DIR: &str = "artifacts";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// The raw Q&A dump to ingest.
    pub dump: Option<PathBuf>,
    /// Ground-truth labels, JSONL of {post_id, label}.
    pub labels: Option<PathBuf>,
    /// Output directory for artifacts (overridable with --out).
    pub out: Option<PathBuf>,
    /// Seed lexicon TOML; the built-in tables are used when unset.
    pub seeds: Option<PathBuf>,
    /// Stopword list; the built-in list is used when unset.
    pub stoplist: Option<PathBuf>,
    /// Noun lexicon for the dictionary corpus; built-in when unset.
    pub nouns: Option<PathBuf>,
    /// Literature baseline TOML; built-in when unset.
    pub baseline: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DumpFormatName {
    SeXml,
    Jsonl,
}

impl From<DumpFormatName> for DumpFormat {
    fn from(name: DumpFormatName) -> DumpFormat {
        match name {
            DumpFormatName::SeXml => DumpFormat::SeXml,
            DumpFormatName::Jsonl => DumpFormat::Jsonl,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Global seed; fills embedding and split seeds unless the file sets
    /// them explicitly, and seeds classifier training directly.
    pub seed: u64,
    pub paths: Paths,
    pub format: DumpFormatName,
    /// Abort on the first malformed dump row instead of skipping it.
    pub strict: bool,
    pub filter: CorpusFilter,
    pub embedding: EmbeddingConfig,
    pub expansion: ExpansionConfig,
    pub selection: SelectionRule,
    pub split: SplitConfig,
    pub hyperparams: Hyperparams,
    /// How review verdicts combine into the confirmed-post set.
    pub policy: ConfirmationPolicy,
    /// Optional minimum score for classify output.
    pub score_threshold: Option<f64>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: DEFAULT_SEED,
            paths: Paths::default(),
            format: DumpFormatName::SeXml,
            strict: false,
            filter: CorpusFilter::default(),
            embedding: EmbeddingConfig::default(),
            expansion: ExpansionConfig::default(),
            selection: SelectionRule::default(),
            split: SplitConfig::default(),
            hyperparams: Hyperparams::default(),
            policy: ConfirmationPolicy::Conservative,
            score_threshold: None,
        }
    }
}

/// A fully resolved configuration: seeds propagated, paths absolute, output
/// directory decided, and the hash that manifests record.
#[derive(Debug, Clone)]
pub struct ResolvedConfig {
    pub config: PipelineConfig,
    pub out_dir: PathBuf,
    pub config_hash: String,
}

impl ResolvedConfig {
    pub fn seed(&self) -> u64 {
        self.config.seed
    }

    pub fn parse_mode(&self) -> ParseMode {
        if self.config.strict {
            ParseMode::Strict
        } else {
            ParseMode::Lenient
        }
    }
}

/// Loads (or defaults) the configuration and applies command-line
/// overrides. `seed_override` replaces the global seed; sub-seeds the file
/// does not set explicitly follow it.
pub fn resolve(
    config_path: Option<&Path>,
    seed_override: Option<u64>,
    out_override: Option<&Path>,
) -> Result<ResolvedConfig> {
    let (mut config, explicit) = match config_path {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::usage(format!("cannot read config {}: {e}", path.display()))
            })?;
            let base = path.parent().unwrap_or_else(|| Path::new("."));
            let (config, explicit) = parse_config(&text)?;
            (rebase_paths(config, base), explicit)
        }
        None => (PipelineConfig::default(), ExplicitSeeds::default()),
    };

    if let Some(seed) = seed_override {
        config.seed = seed;
    }
    if !explicit.embedding {
        config.embedding.seed = config.seed;
    }
    if !explicit.split {
        config.split.seed = config.seed;
    }
    if let Some(out) = out_override {
        config.paths.out = Some(out.to_path_buf());
    }

    validate_paths(&config.paths)?;
    config.embedding.validate().map_err(config_error)?;
    config.expansion.validate().map_err(config_error)?;

    let out_dir = config
        .paths
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    let config_hash = hash_config(&config)?;
    Ok(ResolvedConfig {
        config,
        out_dir,
        config_hash,
    })
}

fn config_error(e: archminer_core::CoreError) -> CliError {
    CliError::usage(format!("invalid config: {e}"))
}

/// Which sub-seeds the TOML file set explicitly (a file that writes
/// `embedding.seed = 42` keeps 42 even under `--seed 7`).
#[derive(Debug, Default, Clone, Copy)]
struct ExplicitSeeds {
    embedding: bool,
    split: bool,
}

fn parse_config(text: &str) -> Result<(PipelineConfig, ExplicitSeeds)> {
    let value: toml::Value = text
        .parse()
        .map_err(|e| CliError::usage(format!("config is not valid TOML: {e}")))?;
    let explicit = ExplicitSeeds {
        embedding: value
            .get("embedding")
            .and_then(|t| t.get("seed"))
            .is_some(),
        split: value.get("split").and_then(|t| t.get("seed")).is_some(),
    };
    let config: PipelineConfig = value
        .try_into()
        .map_err(|e| CliError::usage(format!("invalid config: {e}")))?;
    Ok((config, explicit))
}

fn rebase_paths(mut config: PipelineConfig, base: &Path) -> PipelineConfig {
    let rebase = |path: &mut Option<PathBuf>| {
        if let Some(p) = path {
            if p.is_relative() {
                *p = base.join(&p);
            }
        }
    };
    rebase(&mut config.paths.dump);
    rebase(&mut config.paths.labels);
    rebase(&mut config.paths.out);
    rebase(&mut config.paths.seeds);
    rebase(&mut config.paths.stoplist);
    rebase(&mut config.paths.nouns);
    rebase(&mut config.paths.baseline);
    config
}

/// Every input file the config names must exist up front; the output
/// directory is created on demand instead.
fn validate_paths(paths: &Paths) -> Result<()> {
    let named: [(&str, &Option<PathBuf>); 6] = [
        ("paths.dump", &paths.dump),
        ("paths.labels", &paths.labels),
        ("paths.seeds", &paths.seeds),
        ("paths.stoplist", &paths.stoplist),
        ("paths.nouns", &paths.nouns),
        ("paths.baseline", &paths.baseline),
    ];
    for (key, path) in named {
        if let Some(path) = path {
            if !path.is_file() {
                return Err(CliError::usage(format!(
                    "{key} = {} does not exist",
                    path.display()
                )));
            }
        }
    }
    Ok(())
}

/// The configuration fingerprint recorded in every manifest: SHA-256 of the
/// resolved config in canonical JSON (struct field order, sorted maps).
fn hash_config(config: &PipelineConfig) -> Result<String> {
    let json = serde_json::to_string(config)?;
    Ok(sha256_hex(json.as_bytes()))
}

/// Loaders for the lexicon-style inputs that fall back to built-ins.
pub fn load_seeds(config: &PipelineConfig) -> Result<archminer_core::dictionary::SeedLexicon> {
    match &config.paths.seeds {
        Some(path) => archminer_core::dictionary::SeedLexicon::load(path).map_err(Into::into),
        None => Ok(archminer_core::dictionary::SeedLexicon::builtin()),
    }
}

pub fn load_stoplist(config: &PipelineConfig) -> Result<archminer_core::preprocess::StopList> {
    match &config.paths.stoplist {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
                path: path.clone(),
                source: e,
            })?;
            archminer_core::preprocess::StopList::parse(&text).map_err(Into::into)
        }
        None => Ok(archminer_core::preprocess::StopList::standard()),
    }
}

pub fn load_noun_lexicon(config: &PipelineConfig) -> Result<std::collections::BTreeSet<String>> {
    match &config.paths.nouns {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
                path: path.clone(),
                source: e,
            })?;
            Ok(archminer_core::preprocess::read_word_list(&text))
        }
        None => Ok(archminer_core::preprocess::standard_noun_lexicon()),
    }
}

pub fn load_baseline(config: &PipelineConfig) -> Result<archminer_core::relations::LiteratureBaseline> {
    match &config.paths.baseline {
        Some(path) => {
            archminer_core::relations::LiteratureBaseline::load(path).map_err(Into::into)
        }
        None => Ok(archminer_core::relations::LiteratureBaseline::builtin()),
    }
}

/// Convenience for tests and the report: the labels file keyed by post id.
pub fn load_labels(path: &Path) -> Result<BTreeMap<u64, bool>> {
    let bytes = crate::artifacts::read_input(path)?;
    let records = archminer_core::corpus::read_labels_jsonl(bytes.as_slice())?;
    Ok(records
        .into_iter()
        .map(|r| (r.post_id.get(), r.label))
        .collect())
}
