//! Experiment runner for the delayed composite-objective optimizers.
//!
//! Exit codes: 0 success, 1 verify-property failure, 2 usage/config/data
//! error.

mod compare;
mod run;
mod settings;
mod verify;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "comid",
    version,
    about = "Delayed-gradient composite-objective optimizers: learning-curve runs, run comparison, self-checks"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one experiment and emit its learning curve as CSV.
    Run(settings::RunArgs),
    /// Run two configurations on shared data/seed and report their gaps.
    Compare(compare::CompareArgs),
    /// Self-check the library's core numeric claims at desk scale.
    Verify,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.cmd {
        Cmd::Run(args) => settings::resolve(args)
            .and_then(|plan| run::cmd_run(&plan))
            .map(|()| true),
        Cmd::Compare(args) => compare::cmd_compare(args).map(|()| true),
        Cmd::Verify => verify::cmd_verify(),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
