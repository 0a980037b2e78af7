//! `leakbench` command-line runner.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use leakbench::dataio::DataError;
use leakbench::evaluate::EvalError;
use leakbench::features::FeatureError;

use config::ExperimentConfig;

#[derive(Debug, Parser)]
#[command(
    name = "leakbench",
    version,
    about = "Leakage-aware over-sampling experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML experiment document.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides the document's `seed`.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    /// Output directory; overrides `output_dir`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Generate a synthetic cohort in csv_v1 layout.
    Synth,
    /// Preprocess records and write the feature matrix.
    Extract,
    /// Bootstrap-rank features for all, early and late recordings.
    Rank,
    /// Cross-validate one pipeline.
    Run,
    /// Uniform-noise leakage experiment and 2-D toy geometry.
    LeakageDemo,
    /// None / default / tuned / best sampler comparison.
    Search,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Lib(#[from] leakbench::Error),
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::Lib(e.into())
    }
}

impl From<FeatureError> for CliError {
    fn from(e: FeatureError) -> Self {
        CliError::Lib(e.into())
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        CliError::Lib(e.into())
    }
}

impl CliError {
    pub fn name(&self) -> &'static str {
        match self {
            CliError::Config(_) => "ConfigError",
            CliError::Io { .. } => "IoFailure",
            CliError::Lib(e) => e.name(),
        }
    }

    /// 1: I/O or schema, 2: leakage refusal, 3: computational.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 1,
            CliError::Lib(e) if e.is_leakage_refusal() => 2,
            CliError::Lib(e)
                if e.is_io()
                    || matches!(e.name(), "InvalidSpec" | "InvalidConfig" | "InvalidParam") =>
            {
                1
            }
            CliError::Lib(_) => 3,
        }
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config PATH is required".into()))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::Config("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("leakbench-out"));
    let ctx = commands::Context::new(cfg, out)?;
    match cli.command {
        Command::Synth => commands::synth(&ctx),
        Command::Extract => commands::extract(&ctx),
        Command::Rank => commands::rank(&ctx),
        Command::Run => commands::run(&ctx),
        Command::LeakageDemo => commands::leakage_demo(&ctx),
        Command::Search => commands::search(&ctx),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("LEAKBENCH_LOG", "info")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string();
            if msg.starts_with(e.name()) {
                eprintln!("error: {msg}");
            } else {
                eprintln!("error: {}: {msg}", e.name());
            }
            ExitCode::from(e.exit_code())
        }
    }
}
