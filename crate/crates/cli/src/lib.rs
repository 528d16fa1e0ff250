//! Command-line front end: sweep verification, rate/memory tables,
//! symbolic traces and achievability points.

pub mod args;
pub mod config;
pub mod paper;
pub mod points;
pub mod table;
pub mod trace;
pub mod verify;

use std::io::{self, Write};
use std::process::ExitCode;

use hiercc_core::harness::{DemandMode, SweepOptions};
use hiercc_core::{SchemeId, SimError};
use thiserror::Error;

use crate::args::{Cli, Command, SchemeChoice};
use crate::config::Settings;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config keys or an invalid instance; exit status 2.
    #[error("usage error: {0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Sim(SimError),
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Config(_) | SimError::Model(_) | SimError::BudgetExceeded { .. } => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Sim(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

/// Runs a parsed command line; `Ok(false)` means the run completed but a
/// verification failed.
pub fn run(cli: Cli, out: &mut dyn io::Write, err: &mut dyn io::Write) -> Result<bool, CliError> {
    match cli.command {
        Command::Verify(a) => {
            let settings = Settings::resolve(&a.instance)?;
            let req = verify::VerifyRequest {
                settings: settings.clone(),
                schemes: a.scheme.or(settings.scheme).unwrap_or(SchemeChoice::Both).schemes(),
                mode: match a.mode.or(settings.mode).unwrap_or(args::ModeChoice::Exhaustive) {
                    args::ModeChoice::Exhaustive => DemandMode::Exhaustive,
                    args::ModeChoice::Random => {
                        DemandMode::Random { seed: settings.seed, trials: a.trials.or(settings.trials).unwrap_or(100) }
                    }
                },
                options: SweepOptions {
                    budget: a.budget.or(settings.budget).unwrap_or(hiercc_core::harness::DEFAULT_BUDGET),
                    workers: a.workers.or(settings.workers).unwrap_or(1).max(1),
                    oracle: false,
                    library_seed: settings.seed,
                },
                oracle: a.oracle,
                files: a.files.clone(),
            };
            let outcome = verify::verify(&req)?;
            verify::write_summary(&outcome, out)?;
            for note in &outcome.report.notes {
                writeln!(err, "note: {note}")?;
            }
            if let Some(path) = &a.report {
                std::fs::write(path, serde_json::to_string_pretty(&outcome.report)? + "\n")?;
            }
            Ok(outcome.report.passed)
        }
        Command::Table(a) => {
            let rows = if a.rows.is_empty() { table::DEFAULT_ROWS.to_vec() } else { a.rows.clone() };
            let table = table::build(&rows, a.with_paper_baselines);
            match a.format {
                args::Format::Csv => table::write_csv(&table, &mut *out)?,
                args::Format::Json => {
                    serde_json::to_writer_pretty(&mut *out, &table)?;
                    writeln!(out)?;
                }
            }
            for note in table.notes() {
                writeln!(err, "note: {note}")?;
            }
            Ok(true)
        }
        Command::Trace(a) => {
            let settings = Settings::resolve_with_defaults(&a.instance, (3, 2, 6))?;
            let cfg = settings.config()?;
            let scheme = a.scheme.unwrap_or(SchemeId::First);
            let text = trace::trace(&cfg, scheme, a.demand.as_deref(), &a.mirrors, settings.seed)?;
            out.write_all(text.as_bytes())?;
            Ok(true)
        }
        Command::Points(a) => {
            let settings = Settings::resolve_with_defaults(&a.instance, (3, 2, 6))?;
            let cfg = settings.config()?;
            points::write_csv(&points::points(&cfg), &mut *out)?;
            Ok(true)
        }
    }
}

/// Process entry point shared by the binary: maps outcomes to exit codes
/// 0 (pass), 1 (fail) and 2 (usage).
pub fn main_with(cli: Cli) -> ExitCode {
    let mut out = io::stdout().lock();
    let mut err = io::stderr().lock();
    match run(cli, &mut out, &mut err) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let _ = writeln!(err, "hiercc: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
