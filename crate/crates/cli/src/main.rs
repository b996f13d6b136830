//! `deeppink` command-line tool.

mod commands;
mod manifest;

use std::fmt;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use deeppink::{Aggregation, Architecture, ResponseModel, Rule, TrainConfig};
use serde::Serialize;

const CSV_HELP: &str = "\
Feature selection with FDR control using Gaussian model-X knockoffs and a \
paired-input neural network.

CSV files use a comma separator, a mandatory header row of column names, a \
decimal point and unquoted numeric fields. Response files hold exactly one \
column. Covariance files hold a p x p matrix; their header row is optional.

Exit codes: 0 success, 1 diagnostic failure, 2 usage or input error, \
3 numerical error, 4 training divergence.";

#[derive(Debug, Parser)]
#[command(name = "deeppink", version, about, long_about = CSV_HELP)]
struct Cli {
    /// Worker threads for parallel runs and repetitions (default: available processors).
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    workers: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a knockoff copy of a design matrix.
    Knockoffs(KnockoffsArgs),
    /// Train the knockoff ensemble on a dataset and select features.
    Select(SelectArgs),
    /// Run a seeded synthetic experiment and report FDR and power.
    Simulate(SimulateArgs),
    /// Run a built-in diagnostic suite.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum CovarianceArg {
    Empirical,
    Shrinkage,
}

#[derive(Debug, Args)]
struct KnockoffsArgs {
    /// Design matrix CSV (rows are samples).
    #[arg(long)]
    x: std::path::PathBuf,
    /// Known feature covariance CSV; estimated from the data when absent.
    #[arg(long)]
    sigma: Option<std::path::PathBuf>,
    /// Covariance estimator used when no --sigma is given.
    #[arg(long, value_enum, default_value_t = CovarianceArg::Shrinkage)]
    covariance: CovarianceArg,
    /// Fixed shrinkage intensity in [0, 1] (default: estimated from the data).
    #[arg(long)]
    shrinkage: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV for the knockoff matrix.
    #[arg(long)]
    out: std::path::PathBuf,
    /// JSON sidecar path (default: the output path with a .json extension).
    #[arg(long)]
    sidecar: Option<std::path::PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RuleArg {
    Knockoff,
    KnockoffPlus,
}

impl From<RuleArg> for Rule {
    fn from(r: RuleArg) -> Rule {
        match r {
            RuleArg::Knockoff => Rule::Knockoff,
            RuleArg::KnockoffPlus => Rule::KnockoffPlus,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BaselineArg {
    Deeppink,
    NaiveMlp,
}

impl From<BaselineArg> for Architecture {
    fn from(b: BaselineArg) -> Architecture {
        match b {
            BaselineArg::Deeppink => Architecture::DeepPink,
            BaselineArg::NaiveMlp => Architecture::NaiveMlp,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AggregationArg {
    MeanStatistic,
    MeanImportance,
}

impl From<AggregationArg> for Aggregation {
    fn from(a: AggregationArg) -> Aggregation {
        match a {
            AggregationArg::MeanStatistic => Aggregation::MeanStatistic,
            AggregationArg::MeanImportance => Aggregation::MeanImportance,
        }
    }
}

fn parse_level(s: &str) -> Result<f64, String> {
    let q: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if q > 0.0 && q < 1.0 {
        Ok(q)
    } else {
        Err(format!("q must lie in (0, 1), got {s}"))
    }
}

/// Training flags shared by `select` and `simulate`.
#[derive(Debug, Args)]
struct TrainArgs {
    /// Independently initialized networks per dataset.
    #[arg(long, default_value_t = 5)]
    runs: usize,
    #[arg(long, default_value_t = 200)]
    epochs: usize,
    /// Adam learning rate.
    #[arg(long, default_value_t = 0.001)]
    lr: f64,
    /// Mini-batch size.
    #[arg(long, default_value_t = 10)]
    batch: usize,
    /// Scale on the default penalty sqrt(2 ln p / n).
    #[arg(long, default_value_t = TrainConfig::default().l1_multiplier)]
    l1_multiplier: f64,
    /// Absolute L1 penalty; overrides the default formula.
    #[arg(long)]
    l1_lambda: Option<f64>,
    /// How run-level results are combined.
    #[arg(long, value_enum, default_value_t = AggregationArg::MeanStatistic)]
    aggregation: AggregationArg,
    /// Network architecture.
    #[arg(long, value_enum, default_value_t = BaselineArg::Deeppink)]
    baseline: BaselineArg,
}

impl TrainArgs {
    fn config(&self) -> TrainConfig {
        TrainConfig {
            learning_rate: self.lr,
            batch_size: self.batch,
            epochs: self.epochs,
            l1_lambda: self.l1_lambda,
            l1_multiplier: self.l1_multiplier,
            runs: self.runs,
            architecture: self.baseline.into(),
            aggregation: self.aggregation.into(),
            ..TrainConfig::default()
        }
    }
}

#[derive(Debug, Args)]
struct SelectArgs {
    #[arg(long)]
    x: std::path::PathBuf,
    /// Response CSV with a single column.
    #[arg(long)]
    y: std::path::PathBuf,
    /// Known feature covariance CSV (columns are then centered but not scaled).
    #[arg(long)]
    sigma: Option<std::path::PathBuf>,
    #[arg(long, value_enum, default_value_t = CovarianceArg::Shrinkage)]
    covariance: CovarianceArg,
    #[arg(long)]
    shrinkage: Option<f64>,
    /// Target FDR level in (0, 1).
    #[arg(long, default_value_t = 0.2, value_parser = parse_level)]
    q: f64,
    #[arg(long, value_enum, default_value_t = RuleArg::KnockoffPlus)]
    rule: RuleArg,
    #[command(flatten)]
    train: TrainArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output JSON report.
    #[arg(long)]
    out: std::path::PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelArg {
    Linear,
    SingleIndex,
}

impl From<ModelArg> for ResponseModel {
    fn from(m: ModelArg) -> ResponseModel {
        match m {
            ModelArg::Linear => ResponseModel::Linear,
            ModelArg::SingleIndex => ResponseModel::SingleIndex,
        }
    }
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, value_enum, default_value_t = ModelArg::Linear)]
    model: ModelArg,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 50)]
    p: usize,
    /// Number of nonzero coefficients (default: 30 linear, 10 single-index, capped at p).
    #[arg(long)]
    s: Option<usize>,
    /// Coefficient magnitude; signs are random.
    #[arg(long, default_value_t = 1.5)]
    amplitude: f64,
    /// Autoregressive parameter of the precision matrix.
    #[arg(long, default_value_t = 0.5)]
    rho: f64,
    /// Noise standard deviation.
    #[arg(long, default_value_t = 1.0)]
    noise: f64,
    #[arg(long, default_value_t = 0.2, value_parser = parse_level)]
    q: f64,
    #[arg(long, value_enum, default_value_t = RuleArg::KnockoffPlus)]
    rule: RuleArg,
    #[arg(long, default_value_t = 10)]
    reps: usize,
    #[command(flatten)]
    train: TrainArgs,
    /// Experiment seed; every random stream derives from it.
    #[arg(long)]
    seed: u64,
    /// Directory for report.json and repetitions.csv (created if missing).
    #[arg(long)]
    out_dir: std::path::PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Diagnostic {
    /// Finite-difference check of the analytic gradients.
    GradientCheck,
    /// Sample covariance of (X, X̃) against the required block structure.
    Exchangeability,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(value_enum)]
    diagnostic: Diagnostic,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random networks for the gradient check.
    #[arg(long, default_value_t = 50)]
    instances: usize,
    /// Samples for the exchangeability check.
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    /// Features for the exchangeability check.
    #[arg(long, default_value_t = 10)]
    p: usize,
    /// Sample knockoffs from a deliberately wrong gap vector (for testing the diagnostic).
    #[arg(long)]
    corrupt_s: bool,
    /// Also write the result as JSON.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

/// Failure of a subcommand, carrying its exit code.
#[derive(Debug)]
enum CliError {
    /// A core failure, tagged with the pipeline stage that raised it.
    Stage(&'static str, deeppink::Error),
    /// A diagnostic ran but did not pass.
    DiagnosticFailed(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::DiagnosticFailed(_) => 1,
            CliError::Stage(_, e) if e.is_divergence() => 4,
            CliError::Stage(_, e) if e.is_input_error() => 2,
            CliError::Stage(..) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Stage(stage, e) => write!(f, "{stage}: {e}"),
            CliError::DiagnosticFailed(m) => write!(f, "diagnostic failed: {m}"),
        }
    }
}

/// Tags core errors with a stage name.
trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T, CliError>;
}

impl<T> StageExt<T> for deeppink::Result<T> {
    fn stage(self, stage: &'static str) -> Result<T, CliError> {
        self.map_err(|e| CliError::Stage(stage, e))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(workers) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(workers as usize)
            .build_global()
        {
            eprintln!("error: cannot configure worker pool: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Knockoffs(a) => commands::knockoffs(a),
        Command::Select(a) => commands::select(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Validate(a) => commands::validate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
