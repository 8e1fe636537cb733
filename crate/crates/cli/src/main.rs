//! `ambiswitch`: validate, solve, sweep, simulate and plot optimal switching
//! problems under drift ambiguity.
//!
//! Exit codes: 0 success, 1 validation failure, 2 solver non-convergence,
//! 3 I/O or schema error.

mod commands;
mod error;
mod grid_args;
mod io;
mod shapes;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{plot, simulate, solve, sweep, validate};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "ambiswitch", version, about = "Optimal switching under drift ambiguity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a problem file against the standing assumptions.
    Validate(validate::ValidateArgs),
    /// Solve a problem by PDE, smooth fit or fund classification.
    Solve(solve::SolveArgs),
    /// Solve over a range of ambiguity levels.
    Sweep(sweep::SweepArgs),
    /// Monte Carlo estimate of a strategy's objective.
    Simulate(simulate::SimulateArgs),
    /// Draw CSV columns as an SVG line chart.
    Plot(plot::PlotArgs),
}

/// Sizes the global pool from `AMBISWITCH_THREADS` (0 or unset: automatic).
fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("AMBISWITCH_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Validation(format!("AMBISWITCH_THREADS must be a non-negative integer, got '{raw}'")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Validation(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match &cli.command {
        Command::Validate(a) => validate::run(a),
        Command::Solve(a) => solve::run(a),
        Command::Sweep(a) => sweep::run(a),
        Command::Simulate(a) => simulate::run(a),
        Command::Plot(a) => plot::run(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code() as u8)
        }
    }
}
