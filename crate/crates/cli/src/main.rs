//! `hubs`: run growth simulations, branching processes and the experiment
//! suites from a TOML configuration.
//!
//! Exit codes: 0 success, 2 configuration error, 3 resource cap reached,
//! 4 an experiment verdict failed, 1 anything else.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "hubs", version, about = "Persistent hubs in generalized preferential attachment")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed; overrides `rng.master_seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Replicate count; overrides the file.
    #[arg(long, global = true)]
    pub reps: Option<u64>,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads. Changes wall time only, never results.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Grow graphs and write per-checkpoint trajectories.
    SimulateGraph,
    /// Run the branching process and write per-replicate summaries.
    SimulateCtbp,
    /// Run the two-vertex race chain.
    Race,
    /// Solve for the Malthusian rate.
    Malthusian,
    /// Numerical checks of the regime assumptions.
    CheckAssumptions,
    /// Run an experiment suite and write summary.csv and trajectories.csv.
    Experiment { name: String },
    /// Run a 20-replicate pilot and write a versioned acceptance file.
    Calibrate { name: Option<String> },
}

/// Outcome classes mapped onto exit codes.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Resource(String),
    Verdict(String),
    Other(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Resource(_) => 3,
            Failure::Verdict(_) => 4,
            Failure::Other(_) => 1,
        }
    }
}

impl From<hubs_core::Error> for Failure {
    fn from(e: hubs_core::Error) -> Self {
        use hubs_core::Error as E;
        match e {
            E::Config(_) | E::Domain(_) | E::Model(_) | E::Regime(_) => Failure::Config(e.to_string()),
            E::Resource(_) => Failure::Resource(e.to_string()),
            E::Range { .. } | E::Numeric(_) => Failure::Other(e.to_string()),
        }
    }
}

impl From<config::ConfigError> for Failure {
    fn from(e: config::ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let msg = match &f {
                Failure::Config(m) | Failure::Resource(m) | Failure::Verdict(m) | Failure::Other(m) => m,
            };
            eprintln!("hubs: {}", msg.trim_end());
            ExitCode::from(f.code())
        }
    }
}
