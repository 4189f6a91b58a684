//! `urcwet`: evaluate, cross-validate and sweep WET-powered short-packet links.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{CliError, SweepMode};
use config::ScenarioConfig;

#[derive(Parser)]
#[command(name = "urcwet", version, about)]
struct Cli {
    /// Scenario file (`key = value` lines).
    #[arg(long, global = true, default_value = "scenarios/reference.conf")]
    config: PathBuf,
    /// Output CSV path; overrides the `output` key. Defaults to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Monte Carlo seed; overrides the `seed` key.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Error probability of one allocation under every evaluator.
    Eval {
        /// WET blocklength; overrides the `v` key.
        #[arg(long)]
        v: Option<u64>,
        /// WIT blocklength; overrides the `n` key.
        #[arg(long)]
        n: Option<u64>,
    },
    /// Cross-check the evaluators over the `grid_*` points.
    Validate,
    /// Optimization sweeps.
    Sweep {
        #[arg(long, value_enum)]
        mode: SweepMode,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = ScenarioConfig::load(&cli.config)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Failed(e.to_string()))?;
    }
    let out = cli.out.or_else(|| cfg.output.clone());
    let out = out.as_deref();
    match cli.command {
        Command::Eval { v, n } => commands::eval(&cfg, v, n, out),
        Command::Validate => commands::validate(&cfg, out),
        Command::Sweep { mode } => commands::sweep(&cfg, mode, out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("urcwet: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
