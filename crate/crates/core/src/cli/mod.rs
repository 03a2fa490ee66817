//! Command-line front end: `validate`, `simulate`, `solve`, `verify`, `report`.
//!
//! Exit codes: 0 pass, 1 check failure, 2 configuration error, 3 I/O error.

pub mod config;
pub mod run;
pub mod summary;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;

pub use config::{parse_config, parse_plan, CheckSpec, Mode, Plan};
pub use run::{build_report, run_simulate, run_solve, run_verify, RunSettings};
pub use summary::emit_summary;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("check could not be evaluated: {0}")]
    Check(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Check(_) => 1,
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "fpduality", version, about = "First-passage duality experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Experiment plan (JSON)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, overriding the plan's `output_dir`
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Replaces the plan's simulation seed
    #[arg(long, global = true)]
    pub seed_override: Option<u64>,
    /// Worker threads for ensemble generation; never changes the output
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Parse and validate the plan
    Validate,
    /// Simulate both drift signs and write the ensembles
    Simulate,
    /// Solve the boundary-value and parabolic problems and write the fields
    Solve,
    /// Run the requested checks and write report.json
    Verify,
    /// Print the summary of an existing report.json
    Report,
}

fn load(cli: &Cli) -> Result<Plan, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    parse_config(path)
}

fn settings(cli: &Cli) -> Result<RunSettings, CliError> {
    if cli.threads == Some(0) {
        return Err(CliError::Config("--threads must be at least 1".into()));
    }
    Ok(RunSettings {
        out: cli.out.clone(),
        seed_override: cli.seed_override,
        threads: cli.threads,
    })
}

/// Runs one command and returns the process exit code.
pub fn execute(cli: &Cli) -> Result<i32, CliError> {
    let settings = settings(cli)?;
    match cli.command {
        Command::Validate => {
            let plan = load(cli)?;
            println!(
                "plan ok: d={} sign={} checks={} mode={:?}",
                plan.process.dimension,
                plan.process.drift_sign,
                plan.checks.len(),
                plan.mode
            );
            Ok(0)
        }
        Command::Simulate => {
            let plan = load(cli)?;
            let pair = run_simulate(&plan, &settings)?;
            println!(
                "hit fractions: primary {:.6}, mirror {:.6}",
                pair.primary.hit_fraction(),
                pair.mirror.hit_fraction()
            );
            Ok(0)
        }
        Command::Solve => {
            let plan = load(cli)?;
            for path in run_solve(&plan, &settings)? {
                println!("{}", path.display());
            }
            Ok(0)
        }
        Command::Verify => {
            let plan = load(cli)?;
            let report = run_verify(&plan, &settings)?;
            print!("{}", emit_summary(&report));
            Ok(if run::outcome_passes(&report, plan.mode) { 0 } else { 1 })
        }
        Command::Report => {
            let dir = match (&cli.out, &cli.config) {
                (Some(out), _) => out.clone(),
                (None, Some(_)) => load(cli)?.output_dir,
                (None, None) => PathBuf::from(config::DEFAULT_OUTPUT_DIR),
            };
            let report = run::read_report(&dir)?;
            print!("{}", emit_summary(&report));
            Ok(0)
        }
    }
}

/// Parses `args` and runs; errors are printed to stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
