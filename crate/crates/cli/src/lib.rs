//! Batch front-end for `symtypes`: reads a JSON experiment configuration,
//! runs one mode and renders the result as CSV or JSON.

pub mod bloch;
pub mod config;
pub mod modes;
pub mod verify;

use std::fmt::Write as _;

use clap::ValueEnum;
use serde::Serialize;
use thiserror::Error;

pub use config::{Config, StateSpec};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Input(symtypes::Error),
    #[error("{0}")]
    Guard(symtypes::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl From<symtypes::Error> for CliError {
    fn from(e: symtypes::Error) -> Self {
        match e {
            symtypes::Error::Guard { .. } => CliError::Guard(e),
            other => CliError::Input(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Guard(_) => 3,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Sanov,
    Avqs,
    Np,
    Verify,
    ExampleBloch,
    Tableaux,
    Project,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Rendered result plus any failed assertions (verify mode).
#[derive(Debug, Clone)]
pub struct Outcome {
    pub text: String,
    pub failures: Vec<String>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.failures.is_empty() {
            0
        } else {
            1
        }
    }
}

/// A table that renders to both formats.
pub struct Table<R> {
    pub header: &'static str,
    pub rows: Vec<R>,
    pub csv_row: fn(&R) -> String,
}

impl<R: Serialize> Table<R> {
    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Csv => {
                let mut out = String::new();
                writeln!(out, "{}", self.header).expect("write to String");
                for r in &self.rows {
                    writeln!(out, "{}", (self.csv_row)(r)).expect("write to String");
                }
                Ok(out)
            }
            Format::Json => json(&self.rows),
        }
    }
}

pub fn json<T: Serialize + ?Sized>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Parse(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Runs one mode.
pub fn run(mode: Mode, config: &Config, seed: u64, format: Format) -> Result<Outcome, CliError> {
    let ok = |text| {
        Ok(Outcome {
            text,
            failures: Vec::new(),
        })
    };
    match mode {
        Mode::Sanov => ok(modes::sanov(config)?.render(format)?),
        Mode::Avqs => ok(modes::avqs(config)?.render(format)?),
        Mode::Np => ok(modes::np(config)?.render(format)?),
        Mode::Tableaux => ok(modes::tableaux(config)?.render(format)?),
        Mode::Project => ok(modes::project(config, format)?),
        Mode::ExampleBloch => {
            let report = bloch::example_bloch(config, seed)?;
            ok(match format {
                Format::Json => json(&report)?,
                Format::Csv => report.to_csv(),
            })
        }
        Mode::Verify => {
            let rows = verify::run_suites(config, seed)?;
            let failures = rows.iter().filter(|r| !r.pass).map(|r| r.label()).collect();
            let table = Table {
                header: verify::SuiteRow::CSV_HEADER,
                rows,
                csv_row: verify::SuiteRow::csv_row,
            };
            Ok(Outcome {
                text: table.render(format)?,
                failures,
            })
        }
    }
}

/// Space-separated counts, safe inside a CSV field.
pub fn join(xs: &[usize]) -> String {
    xs.iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}
