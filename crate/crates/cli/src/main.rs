//! Command-line driver: config → runs → artifacts and reports.
//!
//! Exit codes: 0 success, 1 parameters out of scope, 2 configuration error,
//! 3 no bracket for the blow-up point, 4 PDE solver failure, 5 verification
//! failed.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use fastfront::Error;

#[derive(Debug, Parser)]
#[command(name = "fastfront", version, about = "Accelerating fronts for fast diffusion with a weak Allee effect")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true, default_value = "fastfront.toml")]
    config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for independent jobs (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify the parameters and print the spreading exponents.
    Regime,
    /// Match the blow-up point of a self-similar profile and check its estimates.
    Profile {
        #[arg(long, value_enum, default_value_t = RateArg::Lower)]
        rate: RateArg,
        /// Re-run the estimate checks on the stored profile instead of recomputing it.
        #[arg(long)]
        verify_only: bool,
    },
    /// Run the PDE and store the snapshots.
    Simulate,
    /// Track the configured level sets and fit their growth exponent.
    Track,
    /// Run the sub/supersolution certificates and the level-set sandwich.
    Verify,
    /// Summarize the artifacts present in the output directory.
    Report,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RateArg {
    Lower,
    Reduced,
    Upper,
    All,
}

/// Failure with a specific exit code.
#[derive(Debug)]
pub struct Exit(pub u8, pub String);

impl std::fmt::Display for Exit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.1)
    }
}

impl std::error::Error for Exit {}

fn exit_code(e: &anyhow::Error) -> u8 {
    if let Some(Exit(code, _)) = e.downcast_ref::<Exit>() {
        return *code;
    }
    match e.downcast_ref::<Error>() {
        Some(Error::Bracket(_) | Error::SlopeBracket(_)) => 3,
        Some(Error::Solver { .. } | Error::Integration { .. }) => 4,
        Some(Error::Comparison(_) | Error::Domain(_) | Error::Ambiguous(_) | Error::Refused(_)) => 5,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.jobs > 0 {
        // only fails if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global();
    }
    match commands::dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
