//! Batch experiment runner: theta sums, height flows, Diophantine
//! classification, the logarithm-law Monte Carlo, cohomology residual
//! suites, and Birkhoff quadrature with the theta cross-check.
//!
//! Exit codes: 0 ok, 2 accuracy, 3 configuration.

use clap::{Parser, Subcommand};

mod cmd_birkhoff;
mod cmd_coho;
mod cmd_flow;
mod cmd_theta;
mod util;

use util::CliError;

#[derive(Parser)]
#[command(
    name = "siegel-theta",
    version,
    about = "Siegel heights, Heisenberg nilflows and finite theta sums"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a finite theta sum, fit its growth and classify the
    /// attached automorphism.
    Theta(cmd_theta::ThetaArgs),
    /// Sample log Hgt along a Cartan flow.
    HeightFlow(cmd_flow::HeightFlowArgs),
    /// Classify the Diophantine type of a height trajectory.
    Classify(cmd_flow::ClassifyArgs),
    /// Logarithm-law Monte-Carlo experiment.
    Loglaw(cmd_flow::LoglawArgs),
    /// Cohomology residual and tame-ratio suites.
    Coho(cmd_coho::CohoArgs),
    /// Birkhoff quadrature over a cube, optionally cross-checked against
    /// the lattice φ-sum.
    Birkhoff(cmd_birkhoff::BirkhoffArgs),
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Theta(args) => cmd_theta::run(args),
        Command::HeightFlow(args) => cmd_flow::run_height_flow(args),
        Command::Classify(args) => cmd_flow::run_classify(args),
        Command::Loglaw(args) => cmd_flow::run_loglaw(args),
        Command::Coho(args) => cmd_coho::run(args),
        Command::Birkhoff(args) => cmd_birkhoff::run(args),
    };
    match outcome {
        Ok(()) => {}
        Err(CliError::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            std::process::exit(3);
        }
        Err(CliError::Accuracy(msg)) => {
            eprintln!("accuracy error: {msg}");
            std::process::exit(2);
        }
        Err(CliError::Other(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(1);
        }
    }
}
