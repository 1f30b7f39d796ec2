mod args;
mod commands;
mod output;

use clap::Parser;
use std::process::ExitCode;

use args::Cli;

/// Input rejected before any numerics ran.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct InputError(pub String);

/// Failed checks; the report has already been written.
#[derive(Debug, thiserror::Error)]
#[error("{0} check(s) failed")]
pub struct ChecksFailed(pub usize);

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ChecksFailed>().is_some() {
        return 1;
    }
    if err.downcast_ref::<InputError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<finpoisson::Error>() {
        Some(e) if e.is_input_error() => 2,
        Some(_) => 3,
        None => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
