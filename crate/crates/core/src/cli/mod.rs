//! Command-line front end: `cluster`, `sweep`, `ablate`, `gen`, `embed`.
//!
//! Data goes to files; diagnostics go to stderr. Exit codes: 0 success,
//! 1 usage or parameter error, 2 I/O or parse error, 3 numerical failure.

mod ablate;
mod commands;
mod config;
mod pipeline;
mod report;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use ablate::{
    run_ablation, AblationConfig, AblationRow, NoiseSpec, ABLATION_HEADER, DEFAULT_KNN,
    DEFAULT_NOISE_MEAN, DEFAULT_NOISE_SIGMA,
};
pub use commands::{cmd_ablate, cmd_cluster, cmd_embed, cmd_gen, cmd_sweep, SWEEP_HEADER};
pub use config::{Algorithm, ConfigLayer, ExperimentConfig, SourceArg, DEFAULT_RESTARTS};
pub use pipeline::{cluster_count, load_dataset, run_experiment, CellParams, RunOutcome};
pub use report::{render_report, strip_timings, StageTimes, REPORT_HEADER};

use crate::error::Result;

#[derive(Debug, Parser)]
#[command(name = "smoothclust", version, about = "Subspace clustering with graph-filtered representations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cluster one dataset and write report.txt and labels.csv.
    Cluster(ClusterArgs),
    /// Evaluate a grid of (alpha, k) values into one CSV table.
    Sweep(SweepArgs),
    /// Filter-order study on images with a fixed kNN graph.
    Ablate(AblateArgs),
    /// Write a synthetic dataset.
    Gen(GenArgs),
    /// Export the filtered representation at chosen iterations.
    Embed(EmbedArgs),
}

/// Settings shared by `cluster`, `sweep` and `embed`.
#[derive(Debug, Clone, Default, Args)]
pub struct ExperimentArgs {
    /// `key = value` file; flags take precedence over its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Feature matrix (CSV or binary).
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Ground-truth labels, one integer per line.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// The last CSV column holds ground-truth labels.
    #[arg(long)]
    pub has_labels: bool,
    #[arg(long, value_enum)]
    pub algo: Option<Algorithm>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Filter order.
    #[arg(long)]
    pub k: Option<u32>,
    /// Entries kept per affinity row (trr, ftrr).
    #[arg(long)]
    pub p: Option<usize>,
    /// Number of clusters; defaults to the number of label classes.
    #[arg(long)]
    pub g: Option<usize>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// k-means restarts.
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Filter the raw features (default) or the previous representation.
    #[arg(long, value_enum)]
    pub source: Option<SourceArg>,
    /// Zero the diagonal of the coefficient matrix.
    #[arg(long)]
    pub zero_diag: bool,
    /// z-score every feature before fitting.
    #[arg(long)]
    pub standardize: bool,
    /// Cluster this many times with consecutive seeds; metrics report mean and std.
    #[arg(long)]
    pub repeat: Option<usize>,
    /// Score the graph of every iteration.
    #[arg(long)]
    pub trace_metrics: bool,
}

impl ExperimentArgs {
    /// Config file entries overlaid with the flags that were given.
    pub fn layer(&self) -> Result<ConfigLayer> {
        let file = match &self.config {
            Some(path) => ConfigLayer::from_file(path)?,
            None => ConfigLayer::default(),
        };
        let flags = ConfigLayer {
            data: self.data.clone(),
            labels: self.labels.clone(),
            has_labels: self.has_labels.then_some(true),
            algo: self.algo,
            alpha: self.alpha,
            k: self.k,
            p: self.p,
            g: self.g,
            epsilon: self.epsilon,
            max_iter: self.max_iter,
            seed: self.seed,
            restarts: self.restarts,
            source: self.source,
            zero_diag: self.zero_diag.then_some(true),
            standardize: self.standardize.then_some(true),
            repeat: self.repeat,
            trace_metrics: self.trace_metrics.then_some(true),
        };
        Ok(file.overlay(flags))
    }
}

#[derive(Debug, Clone, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    /// Comma-separated alpha grid.
    #[arg(long, value_delimiter = ',', required = true)]
    pub alphas: Vec<f64>,
    /// Comma-separated filter-order grid.
    #[arg(long, value_delimiter = ',', required = true)]
    pub ks: Vec<u32>,
    /// Output CSV file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct AblateArgs {
    /// Clean images, one flattened row-major image per row.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub has_labels: bool,
    #[arg(long, default_value_t = 16)]
    pub height: usize,
    #[arg(long, default_value_t = 16)]
    pub width: usize,
    #[arg(long, default_value_t = DEFAULT_NOISE_MEAN, allow_negative_numbers = true)]
    pub noise_mean: f64,
    #[arg(long, default_value_t = DEFAULT_NOISE_SIGMA)]
    pub noise_sigma: f64,
    /// Filter the clean images instead of corrupted ones.
    #[arg(long)]
    pub no_noise: bool,
    #[arg(long, default_value_t = 10)]
    pub k_max: u32,
    /// Neighbors per sample in the prior graph.
    #[arg(long, default_value_t = DEFAULT_KNN)]
    pub knn: usize,
    /// Ridge weight for the per-order LSR clustering.
    #[arg(long, default_value_t = 0.01)]
    pub alpha: f64,
    #[arg(long)]
    pub g: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_RESTARTS)]
    pub restarts: usize,
    /// PSNR/SSIM peak value; defaults to the clean data's value range.
    #[arg(long)]
    pub dynamic_range: Option<f64>,
    /// Output CSV file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum GenKind {
    #[default]
    Subspaces,
    Images,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[arg(long, value_enum, default_value_t = GenKind::Subspaces)]
    pub kind: GenKind,
    /// Ambient dimension.
    #[arg(long, default_value_t = 30)]
    pub ambient_dim: usize,
    #[arg(long, default_value_t = 3)]
    pub subspace_dim: usize,
    #[arg(long, default_value_t = 3)]
    pub clusters: usize,
    #[arg(long, default_value_t = 50)]
    pub per_cluster: usize,
    #[arg(long, default_value_t = 0.01)]
    pub noise_sigma: f64,
    /// Mutually orthogonal subspaces.
    #[arg(long)]
    pub orthogonal: bool,
    #[arg(long, default_value_t = 16)]
    pub height: usize,
    #[arg(long, default_value_t = 16)]
    pub width: usize,
    #[arg(long, default_value_t = 4)]
    pub classes: usize,
    #[arg(long, default_value_t = 200)]
    pub per_class: usize,
    #[arg(long, default_value_t = 2.0)]
    pub max_shift: f64,
    #[arg(long, default_value_t = 0.15)]
    pub gain_jitter: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory for features.csv and labels.csv.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct EmbedArgs {
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    /// Iterations to export; 0 is the input itself.
    #[arg(long, value_delimiter = ',', default_value = "1,5")]
    pub iters: Vec<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Cluster(a) => cmd_cluster(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Ablate(a) => cmd_ablate(&a),
        Command::Gen(a) => cmd_gen(&a),
        Command::Embed(a) => cmd_embed(&a),
    }
}
