//! `predclust`: fit, export, generate, benchmark and evaluate predictive
//! clustering models from the command line.
//!
//! Exit codes: 0 success, 2 invalid input or configuration, 3 the exact
//! solver stopped without a feasible solution, 1 anything else.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use predclust::{ClusterType, LossKind, TaskKind};

use config::MethodKind;

#[derive(Parser, Debug)]
#[command(name = "predclust", version, about = "Predictive clustering: cluster rows while fitting one model per cluster")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit one model and write a JSON report plus per-row assignments
    Fit(FitArgs),
    /// Build the exact formulation and write it as MPS (and optionally LP)
    Export(ExportArgs),
    /// Generate synthetic clusterwise data with a true-cluster column
    Synth(SynthArgs),
    /// Greedy versus exact runs over synthetic sizes, written as CSV
    Benchmark(BenchmarkArgs),
    /// Cross-validate with K chosen on validation rows
    Evaluate(EvaluateArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct ModelArgs {
    /// TOML config with [run], [loss], [greedy], [milp], [solver], [eval], [synth], [benchmark] sections
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Target column (default: last column)
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long, value_parser = parse_task)]
    pub task: Option<TaskKind>,
    /// mae, mse or hinge
    #[arg(long, value_parser = parse_loss)]
    pub loss: Option<LossKind>,
    /// arbitrary, cc (closest center) or bb (bounding box)
    #[arg(long, value_parser = parse_geometry)]
    pub geometry: Option<ClusterType>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_enum)]
    pub method: Option<MethodKind>,
    /// Overrides the config seed and PREDCLUST_SEED
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Greedy restart threads (0 = all cores)
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub svm_c: Option<f64>,
    /// L1 weight penalty
    #[arg(long, conflicts_with = "l2")]
    pub l1: Option<f64>,
    /// L2 weight penalty
    #[arg(long)]
    pub l2: Option<f64>,
    /// Center-distance weight of the exact closest-center model
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Bound on every weight in the exact model
    #[arg(long)]
    pub theta_bound: Option<f64>,
    /// Keep points out of boxes they are not assigned to (exact model)
    #[arg(long)]
    pub strict_boxes: bool,
    /// Exact solver time limit in seconds
    #[arg(long)]
    pub time_limit: Option<f64>,
    /// Relative optimality gap at which the exact solver stops
    #[arg(long)]
    pub gap: Option<f64>,
    /// Largest N accepted by the exact method
    #[arg(long)]
    pub exact_max_n: Option<usize>,
    /// Fit on raw feature values
    #[arg(long)]
    pub no_standardize: bool,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    pub data: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Report JSON
    #[arg(long)]
    pub out: PathBuf,
    /// Per-row CSV: row_id, cluster, loss
    #[arg(long)]
    pub assignments: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ExportArgs {
    pub data: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub mps: PathBuf,
    /// Also write the model in LP format
    #[arg(long)]
    pub lp: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_parser = parse_task)]
    pub task: Option<TaskKind>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub k_true: Option<usize>,
    #[arg(long)]
    pub separation: Option<f64>,
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub flip: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct BenchmarkArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Comma-separated sample sizes
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    /// Comma-separated geometries
    #[arg(long, value_delimiter = ',', value_parser = parse_geometry)]
    pub geometries: Option<Vec<ClusterType>>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Largest N given to the exact solver
    #[arg(long)]
    pub milp_cap: Option<usize>,
    #[arg(long)]
    pub time_limit: Option<f64>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    pub data: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
    /// cv<folds> (e.g. cv5) or holdout (65/15/20)
    #[arg(long)]
    pub protocol: Option<String>,
    /// Range `2..7` (inclusive) or list `2,3,5`
    #[arg(long)]
    pub k_grid: Option<String>,
    /// r2, rmse or accuracy
    #[arg(long)]
    pub metric: Option<String>,
    /// Report JSON
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_task(s: &str) -> Result<TaskKind, String> {
    match s.to_ascii_lowercase().as_str() {
        "regression" | "reg" => Ok(TaskKind::Regression),
        "classification" | "class" => Ok(TaskKind::Classification),
        other => Err(format!("unknown task {other:?} (regression or classification)")),
    }
}

fn parse_loss(s: &str) -> Result<LossKind, String> {
    s.parse().map_err(|e: predclust::Error| e.to_string())
}

fn parse_geometry(s: &str) -> Result<ClusterType, String> {
    s.parse().map_err(|e: predclust::Error| e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Fit(a) => commands::fit(a),
        Command::Export(a) => commands::export(a),
        Command::Synth(a) => commands::synth(a),
        Command::Benchmark(a) => commands::benchmark(a),
        Command::Evaluate(a) => commands::evaluate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            if let Some(h) = &e.hint {
                eprintln!("hint: {h}");
            }
            ExitCode::from(e.code)
        }
    }
}
