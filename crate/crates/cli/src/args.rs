use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::io::Layout;

#[derive(Debug, Parser)]
#[command(name = "fmuod", version, about = "Shape, amplitude and magnitude outlier detection for functional data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Flag outliers in a CSV dataset.
    Detect(DetectArgs),
    /// Generate a labeled dataset from a simulation model.
    Simulate(SimulateArgs),
    /// Detection rates over repeated simulations.
    Benchmark(BenchmarkArgs),
    /// F1 of fixed vote thresholds over repeated simulations.
    Sweep(SweepArgs),
    /// Null-model vote rates for threshold selection.
    Baselines(BaselinesArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScaleArg {
    Minmax,
    None,
}

#[derive(Debug, Args)]
pub struct DetectionOpts {
    /// FST_MAR, FST_STR, FST_PRJ, FST_PRJ1 or FST_PRJ2.
    #[arg(long, default_value = "FST_PRJ1")]
    pub method: String,
    /// Number of random projection directions L.
    #[arg(long, default_value_t = 60)]
    pub directions: usize,
    /// Baselines file written by `baselines` (needed by FST_PRJ).
    #[arg(long, value_name = "FILE")]
    pub baselines: Option<PathBuf>,
    /// Scaling applied before stringing.
    #[arg(long, value_enum, default_value_t = ScaleArg::Minmax)]
    pub scale: ScaleArg,
    /// Boxplot whisker factor.
    #[arg(long, default_value_t = 1.5)]
    pub whisker: f64,
}

#[derive(Debug, Args)]
pub struct SimOpts {
    #[arg(long, default_value = "M0")]
    pub model: String,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 50)]
    pub k: usize,
    /// Contamination rate.
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    /// Number of basis functions M.
    #[arg(long, default_value_t = 9)]
    pub basis: usize,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Layout::Long)]
    pub layout: Layout,
    /// Wide layout only: skip the first row.
    #[arg(long)]
    pub header: bool,
    #[arg(long, default_value = ",")]
    pub delimiter: char,
    #[command(flatten)]
    pub detection: DetectionOpts,
    /// Fixed vote thresholds; any one given switches FST_PRJ1 to custom
    /// thresholds (unset ones keep their recommended value).
    #[arg(long)]
    pub tau_shape: Option<f64>,
    #[arg(long)]
    pub tau_amplitude: Option<f64>,
    #[arg(long)]
    pub tau_magnitude: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub sim: SimOpts,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    /// Models, comma-separated or repeated.
    #[arg(long, value_delimiter = ',', default_value = "M1")]
    pub model: Vec<String>,
    /// Methods, comma-separated or repeated.
    #[arg(long, value_delimiter = ',', default_value = "FST_PRJ1")]
    pub method: Vec<String>,
    /// Flags counted by projection methods: union, shape_only,
    /// amplitude_only, magnitude_only (or SH, AM, MG), or all.
    #[arg(long, value_delimiter = ',', default_value = "union")]
    pub scope: Vec<String>,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 50)]
    pub k: usize,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    #[arg(long, default_value_t = 9)]
    pub basis: usize,
    #[arg(long, default_value_t = 50)]
    pub reps: usize,
    #[arg(long, default_value_t = 60)]
    pub directions: usize,
    #[arg(long, value_name = "FILE")]
    pub baselines: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ScaleArg::Minmax)]
    pub scale: ScaleArg,
    #[arg(long, default_value_t = 1.5)]
    pub whisker: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub sim: SimOpts,
    /// Threshold triple `τ_S,τ_A,τ_M`; repeat for several. Defaults to
    /// (τ, τ, τ) for τ = 0.2, 0.3, .., 0.7.
    #[arg(long = "q", value_name = "TS,TA,TM")]
    pub q: Vec<String>,
    #[arg(long, default_value_t = 50)]
    pub reps: usize,
    #[arg(long, default_value_t = 60)]
    pub directions: usize,
    #[arg(long, default_value_t = 1.5)]
    pub whisker: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BaselinesArgs {
    #[command(flatten)]
    pub sim: SimOpts,
    #[arg(long, default_value_t = 50)]
    pub reps: usize,
    #[arg(long, default_value_t = 60)]
    pub directions: usize,
    #[arg(long, default_value_t = 1.5)]
    pub whisker: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}
