//! `seqcert`: batch runner for certified sequential randomness bounds.

mod commands;
mod config;
mod sweep;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "seqcert", version, about = "Certified randomness for sequential maximum-confidence measurements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Maximum confidence in closed form and from its semidefinite program
    Confidence(commands::ConfidenceArgs),
    /// One certified entropy bound
    Bound(commands::BoundArgs),
    /// Certified bounds over a grid of Bob's inconclusive rates, as CSV
    Sweep(sweep::SweepArgs),
    /// Largest overlap product admitting certification in an n-party chain
    Chain(commands::ChainArgs),
    /// Re-verify a stored certificate file
    CertifyCheck(commands::CheckArgs),
}

/// Failure classes and their exit codes.
#[derive(Debug)]
pub enum Failure {
    Usage(anyhow::Error),
    Solver(anyhow::Error),
    Certificate(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Solver(_) => 2,
            Failure::Certificate(_) => 3,
        }
    }

    fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Usage(e) | Failure::Solver(e) | Failure::Certificate(e) => e,
        }
    }
}

impl From<seqcert_core::Error> for Failure {
    fn from(e: seqcert_core::Error) -> Self {
        use seqcert_core::Error as E;
        match e {
            E::Solver(_) | E::InternalInconsistency => Failure::Solver(e.into()),
            E::Certificate(_) => Failure::Certificate(e.into()),
            _ => Failure::Usage(e.into()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.into())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Usage(e.into())
    }
}

pub type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Confidence(args) => commands::confidence(&args),
        Command::Bound(args) => commands::bound(&args),
        Command::Sweep(args) => sweep::run(&args),
        Command::Chain(args) => commands::chain(&args),
        Command::CertifyCheck(args) => commands::certify_check(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error());
            ExitCode::from(f.code())
        }
    }
}
