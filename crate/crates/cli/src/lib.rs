//! Command-line front end: configuration, subcommand runners and output rendering.

pub mod commands;
pub mod config;
pub mod emit;

use std::ffi::OsString;

use thiserror::Error;

pub use config::{parse_config, Command, Format, Grid, Parsed, RunConfig};

/// Environment variable capping the worker pool width of sweeps.
pub const THREADS_ENV: &str = "PT_FORGE_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] pt_forge::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io(_) | CliError::Core(_) => 2,
        }
    }
}

pub const EXIT_INFEASIBLE: i32 = 3;

/// Parses a `PT_FORGE_THREADS` value.
pub fn parse_threads(value: Option<&str>) -> Result<Option<usize>, CliError> {
    match value {
        None => Ok(None),
        Some(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!(
                "{THREADS_ENV} must be a positive integer, got `{s}`"
            ))),
        },
    }
}

fn run_inner(argv: Vec<OsString>, threads: Option<&str>) -> Result<i32, CliError> {
    let config = match parse_config(argv, None)? {
        Parsed::Run(c) => c,
        Parsed::Info(text) => {
            print!("{text}");
            return Ok(0);
        }
    };
    let threads = parse_threads(threads)?;
    let outcome = commands::execute(&config, threads)?;
    let text = emit::render(&config, &outcome.output);
    match &config.output {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
        None => {
            use std::io::Write;
            match std::io::stdout().write_all(text.as_bytes()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(CliError::Io(e.to_string())),
                _ => {}
            }
        }
    }
    Ok(if outcome.infeasible { EXIT_INFEASIBLE } else { 0 })
}

/// Runs the tool and returns the process exit code.
pub fn run(argv: Vec<OsString>, threads: Option<&str>) -> i32 {
    match run_inner(argv, threads) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("pt-forge: {e}");
            e.exit_code()
        }
    }
}
