//! `arclab`: certify parameters, run simulations and sweeps, and check solver
//! convergence.
//!
//! Exit codes: 0 success, 1 not certified / orders out of band / run failed,
//! 2 invalid input, 3 suspected blow-up, 4 bound violations.

mod certify;
mod convergence;
mod simulate;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

pub const EXIT_OK: u8 = 0;
pub const EXIT_NEGATIVE: u8 = 1;
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_BLOWUP: u8 = 3;
pub const EXIT_VIOLATIONS: u8 = 4;

#[derive(Parser)]
#[command(name = "arclab", version, about = "Attraction-repulsion chemotaxis lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check (alpha, beta) against the threshold and search for weights.
    Certify(certify::CertifyArgs),
    /// Run one simulation from a configuration file.
    Simulate {
        config: PathBuf,
        /// Run parameters that fail certification (prints a warning banner).
        #[arg(long)]
        force_params: bool,
        /// Output directory; overrides `[output] directory`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the Cartesian product of parameter lists over a base config.
    Sweep {
        spec: PathBuf,
        #[arg(long)]
        force_params: bool,
        /// Sweep root directory; overrides the spec's `out`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Grid-refinement study on the analytic decay solution.
    Convergence(convergence::ConvergenceArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Certify(args) => certify::run(&args),
        Command::Simulate {
            config,
            force_params,
            out,
        } => simulate::cmd(&config, force_params, out.as_deref()),
        Command::Sweep {
            spec,
            force_params,
            out,
        } => sweep::cmd(&spec, force_params, out.as_deref()),
        Command::Convergence(args) => convergence::run(&args),
    };
    ExitCode::from(code)
}
