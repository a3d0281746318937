//! Command-line surface for the limit-set estimation stack: simulate,
//! transform, fit, infer, diagnose, bootstrap, and study.
//!
//! Exit codes: 0 success, 2 configuration/schema error, 3 numeric failure.

mod commands;
mod config;

use clap::Parser;

pub use config::{FitFlags, StudyGrid};

#[derive(Debug, Parser)]
#[command(
    name = "limitset",
    about = "Gauge-function models for multivariate extremes on Laplace margins",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: commands::Command,
}

/// Runs the CLI against an explicit argument vector; returns the process
/// exit code. Separated from `main` so tests can drive full invocations
/// in-process.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints its own help/version output
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match commands::dispatch(cli.command) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code_for(&err)
        }
    }
}

fn exit_code_for(err: &limitset_core::CoreError) -> i32 {
    match err {
        limitset_core::CoreError::NumericFailure { .. } => 3,
        _ => 2,
    }
}
