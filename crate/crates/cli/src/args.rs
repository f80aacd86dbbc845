use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "threshreg", version, about = "Nonparametric threshold regression: detection, critical values and simulation")]
pub struct Cli {
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(flatten)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
#[group(multiple = false)]
pub struct Format {
    /// JSON on standard output (the default).
    #[arg(long, global = true)]
    pub json: bool,

    /// Aligned plain-text tables.
    #[arg(long, global = true)]
    pub text: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test for and estimate the thresholds of a CSV dataset.
    Detect(DetectArgs),
    /// Critical values of the max of k independent standard normals.
    CriticalValues(CriticalArgs),
    /// Monte Carlo experiments on the built-in designs.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    #[arg(long)]
    pub input: PathBuf,

    #[arg(long)]
    pub y: String,

    /// Covariate column; repeat for several.
    #[arg(long, required = true)]
    pub x: Vec<String>,

    #[arg(long)]
    pub q: String,

    /// The file has no header; columns are zero-based indices.
    #[arg(long)]
    pub no_header: bool,

    #[arg(long, default_value_t = 1.0)]
    pub c: f64,

    #[arg(long, default_value_t = threshreg::kernel::DEFAULT_DELTA)]
    pub delta: f64,

    /// Bandwidth scale; defaults to the covariates' sample standard deviation.
    #[arg(long)]
    pub scale: Option<f64>,

    #[arg(long, default_value_t = threshreg::inference::DEFAULT_ALPHA)]
    pub alpha: f64,

    /// Candidate thresholds per regime in the test.
    #[arg(long, default_value_t = threshreg::inference::DEFAULT_M)]
    pub m: usize,

    #[arg(long, default_value_t = 100)]
    pub grid_points: usize,

    /// Share of observations excluded at both ends of each search interval.
    #[arg(long, default_value_t = 0.05)]
    pub trim: f64,

    /// Quantile trimming of the test's candidate grid.
    #[arg(long, default_value_t = threshreg::inference::DEFAULT_GRID_TRIM)]
    pub test_trim: f64,

    #[arg(long, default_value_t = threshreg::kernel::DEFAULT_MIN_REGIME_OBS)]
    pub min_regime_obs: usize,

    #[arg(long, default_value_t = 5)]
    pub max_thresholds: usize,

    /// Lower corner of the weight box, once per covariate.
    #[arg(long, allow_negative_numbers = true)]
    pub box_lo: Vec<f64>,

    /// Upper corner of the weight box, once per covariate.
    #[arg(long, allow_negative_numbers = true)]
    pub box_hi: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct CriticalArgs {
    /// Largest number of regimes.
    #[arg(long, default_value_t = 5)]
    pub k_max: usize,

    #[arg(long, default_value_t = 1)]
    pub k_min: usize,

    /// Significance levels (comma separated or repeated).
    #[arg(long, value_delimiter = ',', default_values_t = [0.10, 0.05, 0.01])]
    pub alpha: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    /// Rejection rates on the no-threshold design.
    Size,
    /// Three rounds of threshold estimation on the three-threshold design.
    Estimation,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(value_enum)]
    pub experiment: Experiment,

    #[arg(long, default_value_t = 500)]
    pub n: usize,

    #[arg(long, default_value_t = 200)]
    pub reps: usize,

    /// Use 1000 replications; overrides --reps.
    #[arg(long)]
    pub full: bool,

    #[arg(long, default_value_t = 7)]
    pub seed: u64,

    #[arg(long, default_value_t = 1.0)]
    pub c: f64,

    #[arg(long, default_value_t = threshreg::kernel::DEFAULT_DELTA)]
    pub delta: f64,

    #[arg(long, default_value_t = threshreg::inference::DEFAULT_M)]
    pub m: usize,

    /// Significance levels of the size table.
    #[arg(long, value_delimiter = ',', default_values_t = [0.10, 0.05, 0.01])]
    pub alpha: Vec<f64>,

    /// Half-width of the symmetric weight box.
    #[arg(long, default_value_t = threshreg::montecarlo::DEFAULT_SIM_BOX)]
    pub box_half: f64,

    #[arg(long, default_value_t = 100)]
    pub grid_points: usize,

    #[arg(long, default_value_t = 0.05)]
    pub trim: f64,

    #[arg(long, default_value_t = threshreg::inference::DEFAULT_GRID_TRIM)]
    pub test_trim: f64,
}
