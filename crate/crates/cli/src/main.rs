//! `rydqed` command-line front end.

mod commands;
mod config;
mod report;

use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use crate::config::{Cli, RunConfig};
use crate::report::{write_outcome, Manifest};

pub const EXIT_OK: u8 = 0;
pub const EXIT_HARD: u8 = 1;
pub const EXIT_FLAGGED: u8 = 2;
pub const EXIT_USAGE: u8 = 64;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] rydqed::Error),
    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::File { path: path.display().to_string(), source }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Core(rydqed::Error::Domain(_)) => EXIT_USAGE,
            _ => EXIT_HARD,
        }
    }
}

fn execute(cli: &Cli) -> Result<u8, CliError> {
    let cfg = RunConfig::from_cli(cli)?;
    let start = Instant::now();
    let outcome = commands::run(&cfg)?;
    write_outcome(&outcome, cfg.format, cfg.output.as_deref())?;
    if let Some(path) = cfg.manifest_path() {
        Manifest::new(&cfg, &outcome, start.elapsed().as_secs_f64()).write(&path)?;
    }
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    for f in &outcome.flags {
        eprintln!("flag: {f}");
    }
    Ok(if outcome.flags.is_empty() { EXIT_OK } else { EXIT_FLAGGED })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
