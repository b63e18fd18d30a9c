//! Command-line driver: stabilization checks, phase-diagram sweeps,
//! decay-envelope curves, radial simulations, and stationary witness
//! searches, all configured by a single JSON document.
//!
//! Exit codes: 0 success (check: stabilizes), 2 config error,
//! 10 criterion unknown, 11 divergent tails, 12 blow-up.

mod config;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_UNKNOWN: u8 = 10;
pub const EXIT_DIVERGENT: u8 = 11;
pub const EXIT_BLOWUP: u8 = 12;

#[derive(Parser)]
#[command(name = "parastab", version, about = "Stabilization laboratory for semilinear parabolic equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Path to the JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for CSV and manifest files.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Override the window parameter \u{3b8}.
    #[arg(long, global = true)]
    theta: Option<f64>,
    /// Override the envelope calibration constant C.
    #[arg(long = "calibration-c", global = true)]
    calibration_c: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the three criterion integrals and print the verdict.
    Check,
    /// Phase-diagram sweep over example-family exponents.
    Sweep,
    /// Decay-envelope curve (t, k, budget, bound) over a time grid.
    Envelope,
    /// Time-step a radial equation and record the decay curve.
    Simulate,
    /// Shoot for a bounded positive stationary witness.
    Stationary,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let overrides = run::Overrides {
        theta: cli.theta,
        calibration_c: cli.calibration_c,
        jobs: cli.jobs,
    };

    let config_path = match &cli.config {
        Some(p) => p.clone(),
        None => {
            eprintln!("error: --config <path> is required");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let doc = match config::load(&config_path) {
        Ok(doc) => doc,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };

    let code = match (&cli.command, doc) {
        (Command::Check, config::RunConfig::Check(c)) => run::check(c, &cli.out, &overrides),
        (Command::Sweep, config::RunConfig::Sweep(c)) => run::sweep(c, &cli.out, &overrides),
        (Command::Envelope, config::RunConfig::Envelope(c)) => {
            run::envelope(c, &cli.out, &overrides)
        }
        (Command::Simulate, config::RunConfig::Simulate(c)) => {
            run::simulate(c, &cli.out, &overrides)
        }
        (Command::Stationary, config::RunConfig::Stationary(c)) => {
            run::stationary(c, &cli.out, &overrides)
        }
        (_, other) => {
            eprintln!(
                "error: config block '{}' does not match the requested subcommand",
                other.block_name()
            );
            Ok(EXIT_CONFIG)
        }
    };

    match code {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
