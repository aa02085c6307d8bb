//! `qdeco` command-line front end.
//!
//! [`run`] takes the full argument vector and returns the exit code together
//! with what would be written to standard output and standard error, so the
//! binary is a thin wrapper and tests can drive it in-process.
//!
//! Exit codes: 0 on success, 1 on validation or module failure, 2 on usage
//! errors (unknown subcommand or flag, missing or malformed values).

mod args;
mod commands;
mod report;

use clap::error::ErrorKind;
use thiserror::Error;

pub use args::Format;
pub use commands::IDENTITY_SAMPLES;
pub use report::{emit_sweep, format_number, round_sig, RunReport, Table, SIGNIFICANT_DIGITS};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Validation(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error("row {row} has {found} values, header has {expected}")]
    RaggedRows {
        row: usize,
        expected: usize,
        found: usize,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

impl From<qdeco_core::Error> for CliError {
    fn from(e: qdeco_core::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run<I, S>(argv: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let matches = match args::command().try_get_matches_from(&argv) {
        Ok(m) => m,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Outcome {
                    code: 0,
                    stdout: text,
                    stderr: String::new(),
                },
                _ => Outcome {
                    code: 2,
                    stdout: String::new(),
                    stderr: text,
                },
            };
        }
    };
    match execute(&matches) {
        Ok(stdout) => Outcome {
            code: 0,
            stdout,
            stderr: String::new(),
        },
        Err(e) => {
            let mut stderr = format!("error: {e}\n");
            if matches!(e, CliError::Usage(_)) {
                stderr.push_str("\nRun 'qdeco --help' for usage.\n");
            }
            Outcome {
                code: e.exit_code(),
                stdout: String::new(),
                stderr,
            }
        }
    }
}

fn execute(matches: &clap::ArgMatches) -> Result<String, CliError> {
    let (leaf, leaf_matches) = args::resolve(matches);
    let params = args::Params::from_matches(leaf, leaf_matches)?;
    let format = params.format()?;
    let out = params.out().map(str::to_string);
    let text = commands::dispatch(leaf.path, params)?.render(format)?;
    match out {
        Some(path) => {
            std::fs::write(&path, &text)
                .map_err(|e| CliError::Io(format!("cannot write {path}: {e}")))?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}
