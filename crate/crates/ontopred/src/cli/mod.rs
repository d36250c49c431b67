//! Command-line front end: one executable, six subcommands, a shared
//! `key = value` config file, and a run manifest next to every file output.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or validation error.

mod commands;
mod config;
mod manifest;

pub use config::ConfigMap;
pub use manifest::{fnv1a64, Manifest};

use std::ffi::OsString;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Once;

use clap::{ArgAction, Parser, Subcommand};

use crate::error::Error;
use crate::ontology::Namespace;

#[derive(Debug, Parser)]
#[command(
    name = "ontopred",
    version,
    about = "GO-term protein function prediction: ontology preprocessing, graph features, GCN training, and CAFA-style evaluation"
)]
struct Cli {
    /// Flat `key = value` config file; flags override file values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Worker thread cap (env: ONTOPRED_THREADS; default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print term, edge, depth, and root statistics per namespace.
    OntologyStats(OntologyStatsArgs),
    /// Propagate annotations up the is_a hierarchy (true path rule).
    Propagate(PropagateArgs),
    /// Build and export the IC table and weighted adjacency for a namespace.
    BuildGraph(BuildGraphArgs),
    /// Train the GCN model on embeddings plus propagated annotations.
    Train(TrainArgs),
    /// Score proteins with a trained checkpoint.
    Predict(PredictArgs),
    /// Compare predictions against truth annotations (Fmax, AUPR).
    Evaluate(EvaluateArgs),
}

#[derive(Debug, clap::Args)]
struct OntologyStatsArgs {
    /// OBO ontology file.
    #[arg(long)]
    ontology: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct PropagateArgs {
    #[arg(long)]
    ontology: Option<PathBuf>,
    /// Annotation TSV (protein, GO accession, evidence).
    #[arg(long)]
    annotations: Option<PathBuf>,
    /// Output TSV; inferred rows carry the evidence code PROP.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Keep only the 8 experimental evidence codes before propagating.
    #[arg(long, action = ArgAction::SetTrue)]
    experimental_only: bool,
}

#[derive(Debug, clap::Args)]
struct BuildGraphArgs {
    #[arg(long)]
    ontology: Option<PathBuf>,
    #[arg(long)]
    annotations: Option<PathBuf>,
    /// Namespace: MFO, BPO, or CCO.
    #[arg(long)]
    namespace: Option<Namespace>,
    /// Output directory (adjacency.tsv, ic.tsv, manifest).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct TrainArgs {
    #[arg(long)]
    ontology: Option<PathBuf>,
    #[arg(long)]
    annotations: Option<PathBuf>,
    /// Sequence embeddings, TSV or PEMB binary.
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long)]
    namespace: Option<Namespace>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    /// Number of GCN layers (1-4).
    #[arg(long)]
    layers: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Cap on the depth-derived embedding width.
    #[arg(long)]
    depth_cap: Option<usize>,
    /// Output directory (model.txt, per-epoch checkpoints, train_log.tsv).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct PredictArgs {
    #[arg(long)]
    ontology: Option<PathBuf>,
    /// Training annotations, needed to rebuild the model's term graph.
    #[arg(long)]
    annotations: Option<PathBuf>,
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Trained model checkpoint.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long)]
    namespace: Option<Namespace>,
    /// Output predictions TSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Scores below this are omitted from the output.
    #[arg(long)]
    score_floor: Option<f64>,
    /// Make scores hierarchy-consistent (parent >= child) before writing.
    #[arg(long, action = ArgAction::SetTrue)]
    propagate_scores: bool,
}

#[derive(Debug, clap::Args)]
struct EvaluateArgs {
    /// Prediction TSV (protein, GO accession, score).
    #[arg(long)]
    predictions: Option<PathBuf>,
    /// Truth annotation TSV; propagated before scoring.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long)]
    ontology: Option<PathBuf>,
    #[arg(long)]
    namespace: Option<Namespace>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the full 101-point precision/recall curve TSV here.
    #[arg(long)]
    curve_out: Option<PathBuf>,
    /// Make scores hierarchy-consistent before evaluating.
    #[arg(long, action = ArgAction::SetTrue)]
    propagate_scores: bool,
}

/// Errors split by exit code.
#[derive(Debug)]
pub(crate) enum CliError {
    Usage(String),
    Data(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> CliError {
        CliError::Data(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> CliError {
        CliError::Data(Error::Io(e))
    }
}

/// Resolved config file plus helpers for flag-over-file precedence.
pub(crate) struct Ctx {
    cfg: ConfigMap,
}

impl Ctx {
    fn path(&self, flag: Option<PathBuf>, key: &str) -> Option<PathBuf> {
        flag.or_else(|| self.cfg.get(key).map(PathBuf::from))
    }

    fn require_path(&self, flag: Option<PathBuf>, key: &str) -> Result<PathBuf, CliError> {
        self.path(flag, key)
            .ok_or_else(|| CliError::Usage(format!("missing required --{key}")))
    }

    fn parse<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.cfg.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|e| {
                CliError::Usage(format!("config value {key} = {raw:?} is invalid: {e}"))
            }),
        }
    }

    fn parse_or<T>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, CliError>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        Ok(self.parse(flag, key)?.unwrap_or(default))
    }

    fn require<T>(&self, flag: Option<T>, key: &str) -> Result<T, CliError>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        self.parse(flag, key)?
            .ok_or_else(|| CliError::Usage(format!("missing required --{key}")))
    }

    fn flag(&self, set: bool, key: &str) -> bool {
        set || matches!(self.cfg.get(key), Some("true") | Some("1"))
    }
}

static THREAD_POOL: Once = Once::new();

fn init_threads(requested: Option<usize>) {
    let n = requested.or_else(|| {
        std::env::var("ONTOPRED_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    THREAD_POOL.call_once(|| {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = n {
            builder = builder.num_threads(n);
        }
        // a later call in the same process keeps the first pool
        let _ = builder.build_global();
    });
}

/// Parses `args` and runs the chosen subcommand, returning the process exit
/// code. All diagnostics go to stderr; primary output goes to files or
/// stdout as each subcommand documents.
pub fn dispatch<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    0
                }
                _ => {
                    eprint!("{e}");
                    1
                }
            };
        }
    };

    init_threads(cli.threads);

    let cfg = match &cli.config {
        None => ConfigMap::default(),
        Some(path) => match ConfigMap::load(path) {
            Ok(cfg) => cfg,
            Err(e) => {
                eprintln!("error: config file {}: {e}", path.display());
                return 2;
            }
        },
    };
    let ctx = Ctx { cfg };

    let result = match cli.command {
        Command::OntologyStats(args) => commands::ontology_stats(&ctx, args),
        Command::Propagate(args) => commands::propagate(&ctx, args),
        Command::BuildGraph(args) => commands::build_graph(&ctx, args),
        Command::Train(args) => commands::train(&ctx, args),
        Command::Predict(args) => commands::predict(&ctx, args),
        Command::Evaluate(args) => commands::evaluate(&ctx, args),
    };

    match result {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(CliError::Data(e)) => {
            eprintln!("error: {e}");
            2
        }
    }
}
