//! Command-line driver. Exit codes: 0 on success, 1 on user/IO errors and
//! suite failures, 2 on guard violations (size and combinatorial limits).

mod bench;
mod report;
mod run;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use colsel::Method;
use report::RunConfig;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug)]
pub enum AppError {
    User(String),
    Guard(String),
}

impl From<colsel::Error> for AppError {
    fn from(e: colsel::Error) -> Self {
        match e {
            colsel::Error::Guard { .. } => AppError::Guard(e.to_string()),
            other => AppError::User(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "colsel", version, about = "Column subset selection toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a selector on a matrix and write a JSON report
    Select(SelectArgs),
    /// Run a seeded verification suite and write a JSON suite report
    Bench(BenchArgs),
}

#[derive(Args)]
struct SelectArgs {
    /// Target matrix file (dense CSV or MatrixMarket, detected by content)
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Candidate matrix file; defaults to the target itself
    #[arg(long)]
    candidates: Option<PathBuf>,
    /// One of: greedy, lazier, dist, random
    #[arg(long)]
    method: Option<String>,
    /// Benchmark selection size
    #[arg(long)]
    k: Option<usize>,
    /// Number of columns to pick
    #[arg(long)]
    r: Option<usize>,
    /// Sampling parameter for lazier and sketch specs (default 0.1)
    #[arg(long)]
    delta: Option<f64>,
    /// Machine count for dist (default 1)
    #[arg(long)]
    machines: Option<usize>,
    /// Per-machine budget for dist
    #[arg(long = "k-prime")]
    k_prime: Option<usize>,
    /// Aggregation budget for dist
    #[arg(long = "k-dprime")]
    k_dprime: Option<usize>,
    /// Number of rounds for dist (default 1)
    #[arg(long)]
    epochs: Option<usize>,
    /// Row dimension for a Gaussian projection of target and candidates
    #[arg(long = "sketch-rows")]
    sketch_rows: Option<usize>,
    /// Column dimension for a signed sketch of the target
    #[arg(long = "pcps-cols")]
    pcps_cols: Option<usize>,
    /// Accuracy parameter for sketch specs (default 0.25)
    #[arg(long)]
    epsilon: Option<f64>,
    /// Master seed (default 0)
    #[arg(long)]
    seed: Option<u64>,
    /// Report output path
    #[arg(long)]
    out: Option<PathBuf>,
    /// Load the whole run configuration from a JSON file (same schema as
    /// the report's config echo); other flags are then ignored
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// One of: greedy-bound, dist-bound, epochs, lazier-bound,
    /// tight-example, sketch-fidelity
    #[arg(long)]
    suite: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Per-suite trial count (instances, partition seeds, or Monte Carlo
    /// draws, depending on the suite)
    #[arg(long)]
    trials: Option<usize>,
    /// Suite report path (default bench-<suite>.json)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_method(s: &str) -> Result<Method, AppError> {
    match s {
        "greedy" => Ok(Method::Greedy),
        "lazier" => Ok(Method::Lazier),
        "dist" => Ok(Method::Dist),
        "random" => Ok(Method::Random),
        other => Err(AppError::User(format!(
            "unknown method {other:?}; expected greedy, lazier, dist or random"
        ))),
    }
}

fn require<T>(v: Option<T>, what: &str) -> Result<T, AppError> {
    v.ok_or_else(|| AppError::User(format!("--{what} is required")))
}

fn build_config(args: SelectArgs) -> Result<RunConfig, AppError> {
    if let Some(path) = args.config {
        let text = fs::read_to_string(&path)
            .map_err(|e| AppError::User(format!("cannot read config {}: {e}", path.display())))?;
        return serde_json::from_str(&text)
            .map_err(|e| AppError::User(format!("invalid config {}: {e}", path.display())));
    }
    Ok(RunConfig {
        matrix: require(args.matrix, "matrix")?,
        candidates: args.candidates,
        method: parse_method(&require(args.method, "method")?)?,
        k: args.k,
        r: args.r,
        delta: args.delta,
        machines: args.machines,
        k_prime: args.k_prime,
        k_dprime: args.k_dprime,
        epochs: args.epochs,
        sketch_rows: args.sketch_rows,
        pcps_cols: args.pcps_cols,
        epsilon: args.epsilon,
        seed: args.seed.unwrap_or(0),
        out: require(args.out, "out")?,
    })
}

fn dispatch(cli: Cli) -> Result<bool, AppError> {
    match cli.command {
        Command::Select(args) => {
            let config = build_config(args)?;
            run::run_select(&config)?;
            Ok(true)
        }
        Command::Bench(args) => {
            let out = args
                .out
                .unwrap_or_else(|| PathBuf::from(format!("bench-{}.json", args.suite)));
            bench::cmd_bench(&args.suite, args.seed, args.trials, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(AppError::User(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(AppError::Guard(msg)) => {
            eprintln!("error (guard): {msg}");
            ExitCode::from(2)
        }
    }
}
