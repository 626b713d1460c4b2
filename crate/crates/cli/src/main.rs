//! `mvcharlier`: tables, verification and benchmarks for matrix-valued
//! Charlier polynomials.
//!
//! Exit codes: 0 all pass, 1 tolerance failure, 2 no convergence, 64 usage
//! error, 74 I/O failure.

mod bench;
mod config;
mod emit;
mod table;
mod verify;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Flags, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] mvcharlier::Error),
}

#[derive(Debug, Parser)]
#[command(name = "mvcharlier", version, about = "Matrix-valued Charlier polynomials: tables, verification, benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Emit P, H, B, C, rho, Upsilon, U, W and the dual norm at one point.
    Table(Flags),
    /// Check every identity over the parameter grid.
    Verify(Flags),
    /// Time the explicit, Rodrigues and Gram-Schmidt routes to P_n(x).
    Bench(Flags),
}

const EXIT_TOLERANCE: u8 = 1;
const EXIT_NO_CONVERGE: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_IO: u8 = 74;

fn run(command: Command) -> Result<u8, CliError> {
    match command {
        Command::Table(flags) => {
            let cfg = RunConfig::resolve(flags)?;
            emit::write_out(cfg.out.as_deref(), &table::run(&cfg)?)?;
            Ok(0)
        }
        Command::Verify(flags) => {
            let cfg = RunConfig::resolve(flags)?;
            let outcome = verify::run(&cfg)?;
            emit::write_out(cfg.out.as_deref(), &outcome.text)?;
            Ok(match outcome.worst {
                verify::Status::Pass => 0,
                verify::Status::Fail => EXIT_TOLERANCE,
                verify::Status::NoConverge => EXIT_NO_CONVERGE,
            })
        }
        Command::Bench(flags) => {
            let cfg = RunConfig::resolve(flags)?;
            let outcome = bench::run(&cfg)?;
            emit::write_out(cfg.out.as_deref(), &outcome.text)?;
            Ok(if outcome.agree { 0 } else { EXIT_TOLERANCE })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("mvcharlier: {e}");
            ExitCode::from(match e {
                CliError::Usage(_) => EXIT_USAGE,
                CliError::Io(_) => EXIT_IO,
                CliError::Core(mvcharlier::Error::NoConverge { .. }) => EXIT_NO_CONVERGE,
                CliError::Core(_) => EXIT_TOLERANCE,
            })
        }
    }
}
