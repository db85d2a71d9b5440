mod config;
mod scenarios;

use std::process::ExitCode;

use clap::Parser;

use crate::config::Cli;

// exit codes: 0 success, 2 validation/usage, 3 numerical failure, 4 file I/O
fn main() -> ExitCode {
    let cli = Cli::parse(); // clap exits with code 2 on usage errors
    match scenarios::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
