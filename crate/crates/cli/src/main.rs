//! `bandsamp`: density constants, frame-bound verification and sweeps.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod constants_cmd;
mod error;
mod output;
mod sets;
mod sweep_cmd;
mod verify_cmd;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use constants_cmd::ConstantsArgs;
use error::CliError;
use sweep_cmd::SweepCmd;
use verify_cmd::VerifyCmd;

#[derive(Debug, Parser)]
#[command(name = "bandsamp", version, about = "Density constants and frame bounds for derivative and bunched sampling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tables of C(k,d), Wirtinger constants or bunched constants.
    Constants(ConstantsArgs),
    /// Frame-inequality experiments; exit 0 iff every verdict passes.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Ratio envelopes against δ, τ or ε.
    #[command(subcommand)]
    Sweep(SweepCmd),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Constants(a) => constants_cmd::run(a),
        Command::Verify(c) => verify_cmd::run(c),
        Command::Sweep(c) => sweep_cmd::run(c),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                CliError::Io { .. } => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}
