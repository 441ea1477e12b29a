//! `iet`: command-line frontend for interval exchange renormalization.
//!
//! Exit codes: 0 success, 2 a hypothesis failed on some instance (not
//! admissible, connection, residual or decay gate), 1 malformed input.

mod args;
mod commands;
mod error;
mod input;
mod report;

use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use error::Result;
use report::Report;

fn dispatch(cli: &Cli) -> Result<Report> {
    let g = &cli.global;
    match &cli.command {
        Command::Analyze(a) => commands::analyze(a, g),
        Command::Rv(a) => commands::rv(a, g),
        Command::Lyapunov(a) => commands::lyapunov(a, g),
        Command::DcTest(a) => commands::dc_test_cmd(a, g),
        Command::Solve(a) => commands::solve_cmd(a, g),
        Command::Codim(a) => commands::codim(a),
        Command::Loops(a) => commands::loops(a, g),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let ok = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            return ExitCode::from(if ok { 0 } else { 1 });
        }
    };
    match dispatch(&cli) {
        Ok(report) => {
            for d in report.diagnostics() {
                eprintln!("error: {d}");
            }
            let mut out = std::io::stdout().lock();
            if out.write_all(report.render(&cli.global).as_bytes()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
