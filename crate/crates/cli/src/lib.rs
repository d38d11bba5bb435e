//! Command-line front end for `condrisk`: loads a scenario file, runs one
//! solver and writes a per-atom report.
//!
//! Exit codes: 0 success, 1 an axiom check failed, 2 usage or scenario
//! errors, 3 a solver residual exceeded `--tol`, 4 a duality gap exceeded
//! `--tol`.

pub mod commands;
pub mod report;
pub mod scenario;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use report::Format;

pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    /// Malformed JSON; the message includes line and column when known.
    #[error("invalid scenario JSON: {message}")]
    Json {
        line: Option<(usize, usize)>,
        message: String,
    },
    #[error("{field}: {message}")]
    Scenario { field: String, message: String },
    #[error(transparent)]
    Library(#[from] condrisk::CondRiskError),
    #[error("cannot write report: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Library(condrisk::CondRiskError::NotConverged { .. }) => 3,
            CliError::Output(_) => 1,
            _ => 2,
        }
    }
}

/// How a successful run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    AxiomFailed,
    Residual,
    Gap,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::AxiomFailed => 1,
            Status::Residual => 3,
            Status::Gap => 4,
        }
    }
}

fn positive_float(s: &str) -> Result<f64, String> {
    match s.trim().parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("must be a positive finite number, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "condrisk",
    version,
    about = "Conditional OCEs, divergences and niveloid checks on scenario files"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Scenario file (JSON), or a report written with --echo-input.
    pub file: PathBuf,
    /// Solver tolerance; also the residual and gap threshold.
    #[arg(long, env = "CONDRISK_TOL", default_value_t = DEFAULT_TOL, value_parser = positive_float)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Embed the scenario in the report (JSON only).
    #[arg(long)]
    pub echo_input: bool,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    #[command(flatten)]
    pub common: Common,
    /// kl, chi2 or power:<alpha>.
    #[arg(long, default_value = "kl")]
    pub divergence: String,
    /// Position label; all positions when omitted.
    #[arg(long)]
    pub position: Option<String>,
}

#[derive(Debug, Args)]
pub struct EntropicArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub position: Option<String>,
}

#[derive(Debug, Args)]
pub struct DivergenceArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value = "kl")]
    pub divergence: String,
    /// Label under `measures` (or `positions`) holding the state weights of nu.
    #[arg(long)]
    pub measure: String,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub common: Common,
    /// expectation, entropic, atom-min, squared-expectation, iphi:<gen>,
    /// oce:<gen>, or niv:<operator>.
    #[arg(long)]
    pub operator: String,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 0x5eed)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Primal conditional OCE per atom.
    Oce(SolverArgs),
    /// Divergence-penalized dual per atom.
    Dual(SolverArgs),
    /// Primal, dual and their gap per atom.
    Gap(SolverArgs),
    /// Closed-form conditional entropic risk.
    Entropic(EntropicArgs),
    /// Conditional divergence of a measure from the base measure.
    Divergence(DivergenceArgs),
    /// Sampled niveloid axiom check of an operator.
    Check(CheckArgs),
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Oce(a) | Command::Dual(a) | Command::Gap(a) => &a.common,
            Command::Entropic(a) => &a.common,
            Command::Divergence(a) => &a.common,
            Command::Check(a) => &a.common,
        }
    }
}

/// Rendered report plus the exit status.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub text: String,
    pub status: Status,
}

pub fn run(cli: &Cli) -> Result<Output, CliError> {
    commands::run(&cli.command)
}
