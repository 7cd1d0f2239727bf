//! The `archminer` command-line pipeline: subcommands that take a raw Q&A
//! dump through ingestion, embedding, dictionary expansion, classifier
//! training, mining, human review, and the final relationship reports, with
//! every stage writing file artifacts plus a run manifest.

use std::path::PathBuf;
use std::str::FromStr;

use archminer_core::classifiers::Algorithm;
use clap::{Parser, Subcommand, ValueEnum};

pub mod artifacts;
pub mod commands;
pub mod config;
pub mod data;
pub mod error;
pub mod manifest;

use error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(
    name = "archminer",
    version,
    about = "Mine quality-attribute / architecture-tactic knowledge from developer Q&A dumps"
)]
pub struct Cli {
    /// Pipeline configuration TOML.
    #[arg(long, global = true, env = "ARCHMINER_CONFIG", value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Global seed; overrides the config and flows into unset sub-seeds.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output directory for artifacts; overrides the config.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Pin manifest and verdict timestamps to this Unix epoch second
    /// (reproducible runs).
    #[arg(long, global = true, value_name = "SECONDS")]
    pub epoch: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GraphFormat {
    Gexf,
    Dot,
    Both,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse, filter, and tokenize a Q&A dump into the working corpus.
    Ingest {
        /// Dump file; overrides paths.dump from the config.
        #[arg(long, value_name = "FILE")]
        dump: Option<PathBuf>,
    },
    /// Train word vectors on the tokenized corpus.
    Embed,
    /// Expand the seed lexicon into the weighted term dictionary.
    DictExpand,
    /// Fit the TF-IDF vocabulary, apply dictionary augmentation, and select
    /// features.
    Vectorize,
    /// Train classifiers on the labeled corpus (all six by default).
    Train {
        /// Train a single algorithm: svm, bayes, dt, lr, rf, or bagging.
        #[arg(long, value_name = "ALGO")]
        algo: Option<String>,
        /// Train every algorithm (the default when --algo is absent).
        #[arg(long, conflicts_with = "algo")]
        all: bool,
    },
    /// Score the whole corpus with a trained model and rank candidates.
    Classify {
        /// Which trained model to apply (default: svm).
        #[arg(long, value_name = "ALGO")]
        algo: Option<String>,
        /// Keep only candidates scoring at least this value.
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Score trained models on the held-out split, or run the dictionary
    /// ablation or annotator-agreement analyses.
    Evaluate {
        /// Compare every algorithm with and without dictionary augmentation.
        #[arg(long)]
        ablation: bool,
        /// Compute Cohen's kappa between two annotators' verdicts.
        #[arg(long, num_args = 2, value_names = ["ANNOTATOR_A", "ANNOTATOR_B"], conflicts_with = "ablation")]
        kappa: Option<Vec<String>>,
    },
    /// Interactively accept/reject mined candidates and label polarities.
    Review {
        /// Name recorded on every verdict and polarity this session writes.
        #[arg(long)]
        annotator: String,
        /// Stop after this many posts (the session is resumable).
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Detect tactic/attribute instances in confirmed posts and build the
    /// interaction matrix and polarity ledger.
    Relate,
    /// Compare the polarity ledger against the literature baseline.
    DiffLit,
    /// Export the dictionary's semantic network as GEXF and/or DOT.
    ExportGraph {
        #[arg(long, value_enum, default_value_t = GraphFormat::Both)]
        format: GraphFormat,
    },
    /// Assemble the consolidated markdown report from all artifacts.
    Report,
}

fn parse_algorithm(name: &str) -> Result<Algorithm> {
    Algorithm::from_str(name).map_err(|_| {
        CliError::usage(format!(
            "unknown algorithm {name:?}; expected one of svm, bayes, dt, lr, rf, bagging"
        ))
    })
}

pub fn run(cli: Cli) -> Result<()> {
    let resolved = config::resolve(cli.config.as_deref(), cli.seed, cli.out.as_deref())?;
    let epoch = cli.epoch;
    match cli.command {
        Command::Ingest { dump } => commands::ingest::run(&resolved, epoch, dump.as_deref()),
        Command::Embed => commands::embed::run(&resolved, epoch),
        Command::DictExpand => commands::dict_expand::run(&resolved, epoch),
        Command::Vectorize => commands::vectorize::run(&resolved, epoch),
        Command::Train { algo, all: _ } => {
            let algorithms = match algo {
                Some(name) => vec![parse_algorithm(&name)?],
                None => Algorithm::ALL.to_vec(),
            };
            commands::train::run(&resolved, epoch, &algorithms)
        }
        Command::Classify { algo, threshold } => {
            let algorithm = match algo.as_deref() {
                Some(name) => parse_algorithm(name)?,
                None => Algorithm::Svm,
            };
            commands::classify::run(&resolved, epoch, algorithm, threshold)
        }
        Command::Evaluate { ablation, kappa } => match kappa {
            Some(names) => {
                commands::evaluate::run_kappa(&resolved, epoch, &names[0], &names[1])
            }
            None if ablation => commands::evaluate::run_ablation(&resolved, epoch),
            None => commands::evaluate::run_metrics(&resolved, epoch),
        },
        Command::Review { annotator, limit } => {
            let stdin = std::io::stdin();
            let stdout = std::io::stdout();
            commands::review::run(
                &resolved,
                epoch,
                &annotator,
                limit,
                &mut stdin.lock(),
                &mut stdout.lock(),
            )
        }
        Command::Relate => commands::relate::run(&resolved, epoch),
        Command::DiffLit => commands::diff_lit::run(&resolved, epoch),
        Command::ExportGraph { format } => commands::export_graph::run(&resolved, epoch, format),
        Command::Report => commands::report::run(&resolved, epoch),
    }
}
