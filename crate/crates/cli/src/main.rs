//! `decay`: bound columns of matrix functions, compare them with exact
//! oracles and regenerate the reference figure data as CSV.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 numerical failure
//! (including non-converged quadrature), 3 dominance violation.

mod args;
mod commands;
mod error;
mod figures;
mod matrices;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use error::{CliError, EXIT_USAGE};

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match &cli.command {
        Command::Bound(a) => commands::run_bound(a),
        Command::Compare(a) => commands::run_compare(a),
        Command::Kron(a) => commands::run_kron(a),
        Command::Oracle(a) => commands::run_oracle(a),
        Command::Figure(a) => figures::run_figure(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
