//! Command-line front end for the `fidelity-bounds` library.
//!
//! Exit statuses: 0 clean, 1 usage or configuration error, 2 violation of a
//! proved bound (or a failed evaluation), 3 candidate counterexample to an
//! unproven bound. Candidate states are written as state files next to the report.

pub mod args;
pub mod commands;
pub mod report;

use std::ffi::OsString;

use clap::Parser;

pub use args::{Cli, Command, Format, DEFAULT_SEED};
pub use commands::{exit_status, ExitStatus};
pub use report::{Record, Report, RunConfig};

fn summarize(report: &Report) {
    let worst = report
        .records
        .iter()
        .min_by(|a, b| a.gap.total_cmp(&b.gap))
        .map_or_else(String::new, |r| {
            format!(", min gap {:.3e} ({})", r.gap, r.bound_id)
        });
    eprintln!(
        "{}: {} records{worst}, seed {}, exit {}",
        format!("{:?}", report.config.command).to_lowercase(),
        report.records.len(),
        report.config.seed,
        report.exit_status
    );
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitStatus::ConfigError.code()
            } else {
                0
            };
        }
    };
    let outcome = match &cli.command {
        Command::Compute(a) => commands::compute(a),
        Command::Verify(a) => commands::verify(a),
        Command::Search(a) => commands::search(a),
        Command::Landscape(a) => commands::landscape(a),
    };
    match outcome {
        Ok((report, status)) => {
            if let Err(e) = report::emit(&report) {
                eprintln!("error: cannot write report: {e}");
                return ExitStatus::ConfigError.code();
            }
            if report.config.output.is_some() {
                summarize(&report);
            }
            status.code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitStatus::ConfigError.code()
        }
    }
}
