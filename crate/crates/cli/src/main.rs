//! `rankcomplex` command-line front end.
//!
//! Exit codes: 0 when every requested check passes, 2 when one fails, 1 on
//! input errors. `RANKCOMPLEX_THREADS` caps the worker pool.

use std::process::ExitCode;

use clap::Parser;

use rankcomplex_cli::args::{Cli, Command, Output};
use rankcomplex_cli::commands::{self, Outcome};
use rankcomplex_cli::error::CliError;
use rankcomplex_cli::report;

const THREADS_VAR: &str = "RANKCOMPLEX_THREADS";

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    match raw.trim().parse::<usize>() {
        Ok(t) if t >= 1 => {
            rankcomplex::parallel::init_threads(t);
            Ok(())
        }
        _ => Err(CliError::input(format!("{THREADS_VAR} must be a positive integer, got {raw:?}"))),
    }
}

fn emit(outcome: Outcome, output: &Output) -> Result<(), CliError> {
    let text = outcome.report.render(output.format)?;
    report::write(&text, output.out.as_deref())?;
    match outcome.failure {
        Some(why) => Err(CliError::Failed(why)),
        None => Ok(()),
    }
}

fn run(command: Command) -> Result<(), CliError> {
    configure_threads()?;
    match command {
        Command::Check(a) => emit(commands::check(&a)?, &a.output),
        Command::Poincare(a) => emit(commands::poincare(&a)?, &a.output),
        Command::Poisson(a) => emit(commands::poisson(&a)?, &a.output),
        Command::Report(a) => commands::convert(&a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let label = match e {
                CliError::Input(_) => "error",
                CliError::Failed(_) => "check failed",
            };
            eprintln!("{label}: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
