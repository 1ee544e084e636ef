//! `dpsampler` command-line front end.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;

use config::ExperimentConfig;

const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_CAP: u8 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "dpsampler",
    version,
    about = "Differentially private single-sample release"
)]
struct Cli {
    /// TOML file with default values for any flag; flags win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Release private samples from a dataset file.
    Sample(SampleArgs),
    /// Write the data-specific obscuring schedule.
    Schedule(ScheduleArgs),
    /// Exhaustively audit a mechanism's likelihood ratios.
    Audit(AuditArgs),
    /// Sweep measured accuracy over a grid of epsilons.
    Accuracy(AccuracyArgs),
    /// Compare the dataset sizes each approach needs.
    Complexity(ComplexityArgs),
    /// Compute a mechanism's marginal output law (exact or Monte Carlo).
    Dist(DistArgs),
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    /// roo, dsroo or laplace.
    #[arg(long)]
    mech: Option<String>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Observations CSV or counts JSON.
    #[arg(long, value_name = "FILE")]
    input: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of independent releases.
    #[arg(long)]
    count: Option<u64>,
    /// Obscuring probability override (roo only).
    #[arg(long)]
    q: Option<f64>,
    /// Noise scale override (laplace only).
    #[arg(long)]
    scale: Option<f64>,
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ScheduleArgs {
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct AuditArgs {
    /// roo or dsroo.
    #[arg(long)]
    mech: Option<String>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    k: Option<usize>,
    /// Relative slack on the e^epsilon bound.
    #[arg(long)]
    tol: Option<f64>,
    /// Obscuring probability override (roo only).
    #[arg(long)]
    q: Option<f64>,
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct AccuracyArgs {
    /// Distribution JSON.
    #[arg(long, value_name = "FILE")]
    dist: Option<PathBuf>,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    k: Option<usize>,
    /// Comma-separated or repeated.
    #[arg(long, value_delimiter = ',')]
    epsilon: Vec<f64>,
    /// Restrict to these mechanisms (default: all three).
    #[arg(long, value_delimiter = ',')]
    mech: Vec<String>,
    /// Monte Carlo datasets per point.
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ComplexityArgs {
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DistArgs {
    #[arg(long)]
    mech: Option<String>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Distribution JSON.
    #[arg(long, value_name = "FILE")]
    dist: Option<PathBuf>,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    k: Option<usize>,
    /// exact, mc or auto.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    dpsampler::parallel::with_env_threads(move || match cli.command {
        Command::Sample(a) => commands::sample(a, &cfg),
        Command::Schedule(a) => commands::schedule(a, &cfg),
        Command::Audit(a) => commands::audit(a, &cfg),
        Command::Accuracy(a) => commands::accuracy(a, &cfg),
        Command::Complexity(a) => commands::complexity(a, &cfg),
        Command::Dist(a) => commands::dist(a, &cfg),
    })?
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<dpsampler::Error>() {
            return match e {
                dpsampler::Error::EnumerationCap { .. } => EXIT_CAP,
                dpsampler::Error::Io(_) => EXIT_IO,
                _ => EXIT_USAGE,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return EXIT_IO;
        }
    }
    EXIT_USAGE
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
