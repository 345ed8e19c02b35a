//! `gammacbm`: batch front end for simulating, optimizing and validating
//! maintenance policies described by JSON scenario files.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gammacbm::scenario::EffortPreset;
use gammacbm::Error;

#[derive(Parser)]
#[command(name = "gammacbm", version, about = "Condition-based maintenance of gamma-degrading systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the long-run cost rate of the scenario's policy.
    Simulate(Common),
    /// Search for the cheapest policy meeting the safety limit.
    Optimize(Common),
    /// Compare quadrature values with simulated single-cycle frequencies (at most two components).
    Validate(Common),
    /// Export plot data: critical probability versus delay, reward rate versus period.
    Curves(Common),
    /// Relative variation of the optimal cost under parameter perturbations.
    Sensitivity(Common),
}

#[derive(Args, Clone)]
pub struct Common {
    /// Scenario file (JSON).
    #[arg(long)]
    pub scenario: PathBuf,
    /// Output directory; created if missing.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for every random stream (overrides the scenario).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Simulation effort preset.
    #[arg(long, value_parser = ["quick", "standard", "paper"])]
    pub effort: Option<String>,
}

/// Failure classes and their exit codes.
#[derive(Debug)]
pub enum Failure {
    /// Validation found a quantity with |z| > 3.
    Mismatch,
    Input(String),
    Unsupported(String),
    Numerical(String),
    Output(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Mismatch | Failure::Output(_) => 1,
            Failure::Input(_) => 2,
            Failure::Unsupported(_) => 3,
            Failure::Numerical(_) => 4,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Domain(_) | Error::InvalidModel(_) | Error::Config(_) => Failure::Input(msg),
            Error::UnsupportedDimension(_) => Failure::Unsupported(msg),
            Error::Numerical(_) | Error::SimulationFault(_) => Failure::Numerical(msg),
        }
    }
}

type Handler = fn(&commands::Context) -> Result<(), Failure>;

fn run(cli: Cli) -> Result<(), Failure> {
    let (common, which): (&Common, Handler) = match &cli.command {
        Command::Simulate(c) => (c, commands::simulate),
        Command::Optimize(c) => (c, commands::optimize),
        Command::Validate(c) => (c, commands::validate),
        Command::Curves(c) => (c, commands::curves),
        Command::Sensitivity(c) => (c, commands::sensitivity),
    };
    let effort = common.effort.as_deref().map(EffortPreset::parse).transpose()?;
    let ctx = commands::Context::load(common, effort)?;
    match common.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Failure::Input(format!("cannot start {n} threads: {e}")))?;
            pool.install(|| which(&ctx))
        }
        None => which(&ctx),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Mismatch => eprintln!("validation mismatch: some |z| exceeds 3"),
                Failure::Input(m) => eprintln!("input error: {m}"),
                Failure::Unsupported(m) => eprintln!("unsupported configuration: {m}"),
                Failure::Numerical(m) => eprintln!("numerical failure: {m}"),
                Failure::Output(m) => eprintln!("cannot write output: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}
