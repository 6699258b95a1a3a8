//! `qlse`: generate instances, solve them with either algorithm, sweep the
//! scaling grid and check every invariant.
//!
//! Exit codes: 0 success, 1 acceptance or verification failure, 2 usage or IO error.

mod config;
mod error;
mod gen;
mod output;
mod solve;
mod sweep;
mod verify;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ExperimentConfig, Flags};
use error::CliError;

#[derive(Parser)]
#[command(
    name = "qlse",
    version,
    about = "Eigenstate-filtering and resonant-transition linear solvers, simulated"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write instance files named {N}_{kappa}_{seed}.json
    Gen(Flags),
    /// Solve instance files, one JSON line per run
    Solve(Flags),
    /// Run the parameter grid and write CSV with scaling fits
    Sweep(Flags),
    /// Check every invariant on instance files
    Verify(Flags),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("qlse: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<ExitCode, CliError> {
    match command {
        Command::Gen(flags) => {
            let cfg = ExperimentConfig::resolve("gen", flags)?;
            for path in gen::run(&cfg)? {
                println!("{}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Solve(flags) => {
            let cfg = ExperimentConfig::resolve("solve", flags)?;
            let failed = solve::run(&cfg)?;
            if failed.is_empty() {
                return Ok(ExitCode::SUCCESS);
            }
            eprintln!("qlse: {} run(s) failed acceptance:", failed.len());
            for id in &failed {
                eprintln!("  {id}");
            }
            Ok(ExitCode::from(1))
        }
        Command::Sweep(flags) => {
            let cfg = ExperimentConfig::resolve("sweep", flags)?;
            let rows = sweep::run(&cfg)?;
            let bad = rows
                .iter()
                .filter(|r| r.kind == "run" && r.status != "ok")
                .count();
            if bad > 0 {
                eprintln!("qlse: {bad} grid point(s) did not pass; see the status column");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify(flags) => {
            let cfg = ExperimentConfig::resolve("verify", flags)?;
            let checks = verify::run(&cfg)?;
            Ok(if checks.iter().all(|c| c.pass) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}
