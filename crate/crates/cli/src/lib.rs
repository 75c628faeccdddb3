//! Command-line front end for stochastic collocation runs: configuration,
//! the `solve`/`uq`/`converge`/`mc-check`/`spectrum` commands, CSV and SVG
//! output.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod csv;
pub mod svg;

pub use commands::Outcome;
pub use config::{ConfigError, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("solver failed: {0}")]
    Solver(#[from] nfuq::Error),

    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A check ran to completion and its files were written, but it failed.
    #[error("{message}")]
    Validation { message: String, outcome: Outcome },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Solver(_) | CliError::Io { .. } => 2,
            CliError::Validation { .. } => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "nfuq",
    version,
    about = "Stochastic collocation for neural field equations with random data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// TOML run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Output directory (overrides output.directory).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Worker threads, or `auto` for one per core.
    #[arg(long, global = true, value_name = "K")]
    pub workers: Option<String>,

    /// Override a configuration value, e.g. `--set problem.alpha=-0.5`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,

    /// Output formats, comma separated (csv, svg).
    #[arg(long, global = true, value_delimiter = ',', value_name = "LIST")]
    pub format: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Solve one realization at stochastic.point (or "midpoint").
    Solve,
    /// Collocation mean and variance fields.
    Uq,
    /// Error sweep over spatial sizes and stochastic orders.
    Converge,
    /// Compare the collocation mean against seeded Monte Carlo.
    McCheck,
    /// Spectral abscissa of the linearized operator per kernel sample.
    Spectrum,
}

/// Builds the run configuration from the parsed flags.
pub fn configure(cli: &Cli) -> Result<RunConfig, ConfigError> {
    let mut overrides = cli.overrides.clone();
    if let Some(w) = &cli.workers {
        overrides.push(format!("execution.workers={w}"));
    }
    let mut cfg = config::load(cli.config.as_deref(), &overrides)?;
    if let Some(dir) = &cli.out {
        cfg.output_dir = dir.clone();
    }
    if let Some(list) = &cli.format {
        cfg.formats = config::parse_formats(list)?;
    }
    Ok(cfg)
}

pub fn execute(command: Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    match command {
        Command::Solve => commands::cmd_solve(cfg),
        Command::Uq => commands::cmd_uq(cfg),
        Command::Converge => commands::cmd_converge(cfg),
        Command::McCheck => commands::cmd_mc_check(cfg),
        Command::Spectrum => commands::cmd_spectrum(cfg),
    }
}

fn report_error(err: &dyn std::error::Error) {
    let mut msg = format!("error: {err}");
    let mut source = err.source();
    while let Some(s) = source {
        msg.push_str(&format!("\n  caused by: {s}"));
        source = s.source();
    }
    eprintln!("{msg}");
}

fn print_outcome(outcome: &Outcome) {
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    for line in &outcome.summary {
        let _ = writeln!(lock, "{line}");
    }
    for f in &outcome.files {
        let _ = writeln!(lock, "wrote {}", f.display());
    }
}

/// Runs the program on `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let cfg = match configure(&cli) {
        Ok(c) => c,
        Err(e) => {
            report_error(&e);
            return 1;
        }
    };
    match execute(cli.command, &cfg) {
        Ok(outcome) => {
            print_outcome(&outcome);
            0
        }
        Err(e) => {
            if let CliError::Validation { outcome, .. } = &e {
                print_outcome(outcome);
            }
            report_error(&e);
            e.exit_code()
        }
    }
}
