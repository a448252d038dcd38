use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use symtypes_cli::{run, CliError, Config, Format, Mode};

/// Permutation-invariant hypothesis tests on tensor powers.
#[derive(Debug, Parser)]
#[command(name = "symtypes", version)]
struct Args {
    #[arg(value_enum)]
    mode: Mode,
    /// JSON experiment configuration; every field is optional.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

fn execute(args: &Args) -> Result<i32, CliError> {
    let config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
            Config::parse(&text)?
        }
        None => Config::default(),
    };
    let outcome = run(args.mode, &config, args.seed, args.format)?;
    match &args.out {
        Some(path) => std::fs::write(path, &outcome.text)?,
        None => print!("{}", outcome.text),
    }
    for f in &outcome.failures {
        eprintln!("FAIL {f}");
    }
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("symtypes: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
