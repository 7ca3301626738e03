//! Command-line front end: argument definitions, CSV I/O and the
//! subcommand implementations behind the `fmuod` binary.

pub mod args;
pub mod commands;
pub mod error;
pub mod io;

use args::{Cli, Command};
use error::{CliError, CliResult};

/// Builds the global worker pool from `FMUOD_THREADS`, if set.
pub fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("FMUOD_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Config(format!("FMUOD_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot size worker pool: {e}")))
}

pub fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Detect(a) => commands::detect(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Benchmark(a) => commands::benchmark(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Baselines(a) => commands::baselines(a),
    }
}
