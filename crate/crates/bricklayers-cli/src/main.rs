//! Command-line driver for the bricklayers simulator and verifier.
//!
//! Subcommands: `verify` (identity batteries), `simulate` (Monte Carlo),
//! `walkers` (shock random walks), `hydro` (front tracking), `compare`
//! (Monte Carlo vs mixture prediction). Every run writes a `manifest.json`
//! recording the resolved configuration and seed; with a fixed seed all CSV
//! outputs are byte-identical across runs.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use config::ExperimentConfig;
use report::OutDir;

#[derive(Parser)]
#[command(
    name = "bricklayers",
    about = "Simulator and exact verifier for the bricklayers' interacting particle process",
    version
)]
struct Cli {
    /// TOML experiment configuration (defaults apply when omitted).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the seed of the selected command.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override the replica count of the selected command.
    #[arg(long, global = true)]
    replicas: Option<usize>,

    /// Output directory (must exist).
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Suppress progress lines (outputs and manifest are still written).
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the evolution-identity and measure-identity batteries.
    Verify,
    /// Monte Carlo simulation with replica-averaged estimators.
    Simulate,
    /// Simulate the interacting shock walkers.
    Walkers,
    /// Front-track a piecewise-constant decreasing profile.
    Hydro,
    /// Compare Monte Carlo estimates against the walker-mixture prediction.
    Compare,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn execute(cli: &Cli) -> Result<bool> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            ExperimentConfig::from_toml(&text)?
        }
        None => ExperimentConfig::default(),
    };
    apply_overrides(&mut cfg, cli);

    let mut out = OutDir::open(&cli.out)?;
    let (name, seed, events, passed) = match cli.command {
        Command::Verify => {
            let passed = commands::verify::run(&cfg, &mut out, cli.quiet)?;
            ("verify", cfg.verify.seed, 0, passed)
        }
        Command::Simulate => {
            let events = commands::simulate::run_cmd(&cfg, &mut out, cli.quiet)?;
            ("simulate", cfg.simulate.seed, events, true)
        }
        Command::Walkers => {
            let events = commands::walkers::run_cmd(&cfg, &mut out, cli.quiet)?;
            ("walkers", cfg.walkers.seed, events, true)
        }
        Command::Hydro => {
            let events = commands::hydro::run_cmd(&cfg, &mut out, cli.quiet)?;
            ("hydro", 0, events, true)
        }
        Command::Compare => {
            let (passed, events) = commands::compare::run_cmd(&cfg, &mut out, cli.quiet)?;
            ("compare", cfg.compare.seed, events, passed)
        }
    };
    out.finish(name, seed, &cfg, events, passed)?;
    Ok(passed)
}

fn apply_overrides(cfg: &mut ExperimentConfig, cli: &Cli) {
    if let Some(seed) = cli.seed {
        cfg.verify.seed = seed;
        cfg.simulate.seed = seed;
        cfg.walkers.seed = seed;
        cfg.compare.seed = seed;
    }
    if let Some(replicas) = cli.replicas {
        cfg.simulate.replicas = replicas;
        cfg.compare.replicas = replicas;
    }
}
