use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "calrm", version, about = "Fluid bounds, exact oracles and admission policies for network revenue management with stage-dependent demand")]
pub struct Cli {
    /// Seed for every random stream; identical seeds give identical output.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for simulation and enumeration. Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve fluid LPs and exact oracles and report their values.
    Bounds(BoundsArgs),
    /// Simulate an admission policy and compare it with the PRF and EXF bounds.
    Simulate(SimulateArgs),
    /// Compare the PRF and EXF approximations over generated cells or fixtures.
    Experiment(ExperimentArgs),
    /// Simulate one policy across a grid of thinning parameters.
    SweepGamma(SweepArgs),
    /// Write a generated hub-and-spoke instance with its demand model embedded.
    Generate(GenerateArgs),
    /// Fit a demand model whose total demand has a target law.
    Calibrate(CalibrateArgs),
    /// Write one bound LP in MPS format.
    DumpLp(DumpLpArgs),
}

/// Where the instance comes from: a named fixture or an instance file.
#[derive(Debug, Args)]
pub struct Source {
    /// Built-in fixture: appE1, appE2, appF, appG, appK1, appK2, appN.
    #[arg(long, conflicts_with = "instance", required_unless_present = "instance")]
    pub fixture: Option<String>,
    /// Fixture parameter such as C=8, K=8 or alpha=3. Repeatable.
    #[arg(long = "param", value_name = "NAME=VALUE", requires = "fixture")]
    pub params: Vec<String>,
    /// Instance file (JSON).
    #[arg(long)]
    pub instance: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub source: Source,
    /// Comma-separated list of LP bounds and oracles (dp, offline).
    #[arg(long, value_delimiter = ',', default_value = "prf,exf")]
    pub bound: Vec<String>,
    /// Extra exact oracles, same as listing them under --bound.
    #[arg(long, value_delimiter = ',')]
    pub oracle: Vec<String>,
    /// Sample this many paths for the offline oracle instead of enumerating.
    #[arg(long)]
    pub paths: Option<usize>,
    /// MNL preference weights for the assortment LP, one per product.
    #[arg(long, value_delimiter = ',')]
    pub mnl_weights: Option<Vec<f64>>,
    /// Write the PRF solution as CSV of (k, t, q, j, x).
    #[arg(long)]
    pub solution: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub source: Source,
    /// Admission policy: prf, indep or exf.
    #[arg(long, default_value = "prf")]
    pub policy: String,
    /// Thinning parameter in [0, 1], or auto-asymptotic, or auto-constant.
    #[arg(long, default_value = "1")]
    pub gamma: String,
    #[arg(long, default_value_t = 10_000)]
    pub paths: usize,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Generated cells as STAGES:RHO, comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub cells: Vec<String>,
    /// Fixture cells (default parameters), comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub fixtures: Vec<String>,
    #[arg(long, default_value_t = 2000)]
    pub paths: usize,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[command(flatten)]
    pub generator: GeneratorArgs,
}

#[derive(Debug, Args)]
pub struct GeneratorArgs {
    #[arg(long, default_value_t = 3)]
    pub spokes: usize,
    /// Long-run mean stage demand.
    #[arg(long, default_value_t = 10)]
    pub mean: usize,
    /// Coefficient of variation of a stage demand.
    #[arg(long, default_value_t = 0.3)]
    pub cv: f64,
    /// High-fare to low-fare revenue multiplier.
    #[arg(long, default_value_t = 8.0)]
    pub kappa: f64,
    /// Expected load over capacity.
    #[arg(long, default_value_t = 1.6)]
    pub beta: f64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long, default_value = "prf")]
    pub policy: String,
    /// Comma-separated thinning parameters in [0, 1].
    #[arg(long, value_delimiter = ',', required = true)]
    pub grid: Vec<f64>,
    #[arg(long, default_value_t = 10_000)]
    pub paths: usize,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, default_value_t = 3)]
    pub stages: usize,
    /// Weight of the previous stage's demand in the next stage's mean.
    #[arg(long, default_value_t = 0.5)]
    pub rho: f64,
    #[command(flatten)]
    pub generator: GeneratorArgs,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// JSON file holding either {"K", "T", "pmf"} or a bare pmf array.
    #[arg(long)]
    pub target: PathBuf,
    /// Number of stages; overrides the file.
    #[arg(long = "stages", short = 'K')]
    pub stages: Option<usize>,
    /// Largest stage demand; overrides the file.
    #[arg(long = "max-demand", short = 'T')]
    pub max_demand: Option<usize>,
}

#[derive(Debug, Args)]
pub struct DumpLpArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long, default_value = "prf")]
    pub bound: String,
    /// MNL preference weights for the assortment LP, one per product.
    #[arg(long, value_delimiter = ',')]
    pub mnl_weights: Option<Vec<f64>>,
}
