//! Command-line experiments for the collectibility witness: configuration,
//! the experiment runners and CSV / JSON reporting.

pub mod config;
pub mod error;
pub mod experiments;
pub mod published;
pub mod report;

#[cfg(test)]
mod cli_tests;

use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::Parser;

use config::{Args, RunConfig};
use error::{CliError, CliResult};

/// Runs the configured experiment, writes its report and turns recorded
/// invariant failures into an error after the output is on disk.
pub fn execute(config: &RunConfig) -> CliResult<report::Report> {
    let report = experiments::run(config)?;
    report.emit(config)?;
    if !report.violations.is_empty() {
        return Err(CliError::Invariant(report.violations.join("; ")));
    }
    Ok(report)
}

/// Whole command line to exit code. Usage errors are 1; `--help` and `--version` are 0.
pub fn run_command_line<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match RunConfig::from_args(args).and_then(|c| execute(&c)) {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("collectikit: {e}");
            e.exit_code()
        }
    }
}
