//! `dcext` command-line front end.

mod config;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use thiserror::Error;

use config::{Flags, RunConfig, Verb};

#[derive(Debug, Parser)]
#[command(name = "dcext", version, about = "Extensions of convex and d.c. functions with sampled certificates")]
struct Cli {
    #[command(subcommand)]
    verb: Option<Verb>,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{field}: {message}")]
    Usage { field: String, message: String },
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: dcext::Error,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("report: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn usage(field: &str, message: impl Into<String>) -> Self {
        CliError::Usage {
            field: field.to_string(),
            message: message.into(),
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage { .. } => 2,
            CliError::Core { source, .. } => match source {
                dcext::Error::CertificationFailed(_) => 1,
                dcext::Error::InvalidInput(_) | dcext::Error::DimensionMismatch { .. } => 2,
                _ => 3,
            },
            _ => 3,
        }
    }
}

fn execute(cli: Cli) -> Result<bool, CliError> {
    let cfg = RunConfig::resolve(cli.verb, cli.flags)?;
    let verbose = cfg.verbose;
    let out = run::run(cfg)?;
    if verbose {
        for c in &out.report.certificates {
            eprintln!("{}", c.report_line());
        }
    }
    let passed = out.report.passed();
    let mut text = serde_json::to_string_pretty(&out.report)?;
    text.push('\n');
    if let (Some(path), Some(csv)) = (&out.report.config.csv_out, &out.csv) {
        output::write_atomic(path, csv)?;
    }
    match &out.report.config.report_out {
        Some(path) => output::write_atomic(path, text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(passed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
