//! `irsplan`: command-line front end for the deployment planner.

mod args;
mod commands;
mod sweep;

use std::process::ExitCode;

use clap::Parser;

use args::Cli;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: u8 = 0;
    pub const INFEASIBLE: u8 = 1;
    pub const INPUT: u8 = 2;
    pub const NUMERICAL: u8 = 3;
}

/// What a successful command found.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Done,
    Infeasible,
}

fn error_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<irs_deploy::Error>() {
            return match e {
                irs_deploy::Error::NonConvergence { .. } | irs_deploy::Error::Verification(_) => exit::NUMERICAL,
                _ => exit::INPUT,
            };
        }
    }
    exit::INPUT
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(Outcome::Done) => ExitCode::from(exit::SUCCESS),
        Ok(Outcome::Infeasible) => ExitCode::from(exit::INFEASIBLE),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(error_code(&err))
        }
    }
}
