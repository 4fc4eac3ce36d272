//! Command-line front end of the cohesive phase-field laboratory.
//!
//! Exit codes: 0 success, 1 malformed invocation or config, 2 validation
//! failure, 3 numerical failure.

pub mod config;
mod commands;
mod plot;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::Parser;
use thiserror::Error;

use config::{CliConfig, Command, RegimeName};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config error at `{path}`: {msg}")]
    Config { path: String, msg: String },
    #[error("cannot write output: {0}")]
    Io(String),
    #[error("validation failed: {0}")]
    Invalid(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config { .. } | CliError::Io(_) => EXIT_CONFIG,
            CliError::Invalid(_) => EXIT_VALIDATION,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Flags override the matching config keys.
#[derive(Debug, Parser)]
#[command(name = "cohesive-lab", version, about = "One-dimensional cohesive phase-field fracture laboratory")]
pub struct Args {
    /// Command to run; taken from the config when omitted.
    #[arg(value_enum)]
    pub command: Option<Command>,
    /// JSON config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (default `out`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Law family: `q` (prototype_q) or `p` (prototype_p).
    #[arg(long = "law")]
    pub law: Option<String>,
    #[arg(long = "sigma-c")]
    pub sigma_c: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub p: Option<f64>,
    /// One value, or a comma-separated decreasing ladder for `sweep`.
    #[arg(long, value_delimiter = ',')]
    pub eps: Vec<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub m: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long = "L")]
    pub length: Option<f64>,
    #[arg(long)]
    pub kmax: Option<usize>,
    #[arg(long, value_enum)]
    pub regime: Option<RegimeName>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Exponent of `c_eps = eps^x` in the fractured regime.
    #[arg(long = "c-exponent")]
    pub c_exponent: Option<f64>,
}

/// Runs the CLI with the process streams.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    match execute(&args, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn execute(args: &Args, out: &mut dyn Write) -> Result<i32, CliError> {
    let mut cfg = match &args.config {
        Some(p) => CliConfig::load(p)?,
        None => CliConfig::default(),
    };
    let command = args
        .command
        .or(cfg.command)
        .ok_or_else(|| CliError::Usage("no command given (on the command line or as `command` in the config)".into()))?;
    commands::apply_flags(&mut cfg, args, command)?;
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&dir)?;
    let passed = commands::dispatch(command, &cfg, &dir, out)?;
    Ok(if passed { EXIT_OK } else { EXIT_VALIDATION })
}
