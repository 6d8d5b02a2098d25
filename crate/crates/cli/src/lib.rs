//! Command-line experiments for two-state collapse dynamics: flow fields,
//! noisy trajectories, outcome ensembles, the nonlinear collapse model and
//! envariance checks. Every command writes CSV tables and a JSON summary
//! into an output directory.

pub mod args;
pub mod commands;
pub mod error;
pub mod output;
pub mod presets;

use clap::{Parser, Subcommand};

use commands::{
    ensemble::EnsembleArgs, envariance::EnvarianceArgs, flow_field::FlowFieldArgs, nonlinear::NonlinearArgs,
    trajectory::TrajectoryArgs,
};
pub use error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(name = "bloch-collapse", version, about = "Collapse dynamics on the Bloch sphere")]
pub struct Cli {
    /// Worker threads for parallel runs; results never depend on it
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Velocity field of a constant generator
    FlowField(FlowFieldArgs),
    /// Noisy trajectories under a fluctuating generator
    Trajectory(TrajectoryArgs),
    /// Fuzzy-collapse outcome statistics
    Ensemble(EnsembleArgs),
    /// Outcome statistics of the nonlinear collapse model
    Nonlinear(NonlinearArgs),
    /// Envariance checks and density matrices for branch states
    Envariance(EnvarianceArgs),
}

pub fn run(cli: &Cli) -> CliResult<()> {
    let exec = || match &cli.command {
        Command::FlowField(a) => commands::flow_field::run(a),
        Command::Trajectory(a) => commands::trajectory::run(a),
        Command::Ensemble(a) => commands::ensemble::run(a),
        Command::Nonlinear(a) => commands::nonlinear::run(a),
        Command::Envariance(a) => commands::envariance::run(a),
    };
    match cli.threads {
        None => exec(),
        Some(0) => Err(CliError::usage("threads must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Runtime(e.into()))?
            .install(exec),
    }
}
