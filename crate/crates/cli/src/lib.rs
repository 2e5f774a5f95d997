//! Command-line front end for the Friedrichs model workbench: JSON config
//! in, JSON report plus CSV side-cars out.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::{Job, Outcome};
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "friedrichs", version, about = "Spectral workbench for the matrix-valued Friedrichs model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct JobArgs {
    /// JSON job configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory for the report, timings and CSV side-cars.
    #[arg(long, default_value = "./out")]
    pub out: PathBuf,
    /// Seed for sphere sampling and random trials; overrides the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Check U* = U and K*(x, y) = K(y, x) on the grid.
    Validate(JobArgs),
    /// Essential spectrum bands and their endpoints.
    Bands(JobArgs),
    /// Gap eigenvalues over refinements, with a determinant cross-check.
    Eigs(JobArgs),
    /// Extremal multiplicities, smoothness estimate and finiteness verdict.
    Certify(JobArgs),
    /// Kernel split, weighted L2 diagnostic and finite-rank trials.
    SplitTest(JobArgs),
    /// End-to-end reproduction of the infinite discrete spectrum example.
    Example(JobArgs),
}

impl Command {
    pub fn args(&self) -> &JobArgs {
        match self {
            Self::Validate(a) | Self::Bands(a) | Self::Eigs(a) | Self::Certify(a) | Self::SplitTest(a) | Self::Example(a) => a,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Validate(_) => "validate",
            Self::Bands(_) => "bands",
            Self::Eigs(_) => "eigs",
            Self::Certify(_) => "certify",
            Self::SplitTest(_) => "split-test",
            Self::Example(_) => "example",
        }
    }
}

/// Runs one parsed command inside its own thread pool.
pub fn execute(command: &Command) -> CliResult<Outcome> {
    let args = command.args();
    let config = config::load(&args.config)?;
    let seed = args.seed.or(config.seed).unwrap_or(0);
    let job = Job {
        config,
        seed,
        out: args.out.clone(),
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = args.threads {
        if t == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Resource(format!("cannot start thread pool: {e}")))?;
    pool.install(|| match command {
        Command::Validate(_) => commands::validate(&job),
        Command::Bands(_) => commands::bands(&job),
        Command::Eigs(_) => commands::eigs(&job),
        Command::Certify(_) => commands::certify(&job),
        Command::SplitTest(_) => commands::split_test(&job),
        Command::Example(_) => commands::example(&job),
    })
}

/// Parses `argv`, runs the command and returns the process exit code:
/// 0 ok, 1 config error, 2 validation failure, 3 resource cap.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(outcome) => {
            println!("{}: {}", cli.command.name(), outcome.summary);
            outcome.status.exit_code()
        }
        Err(e) => {
            eprintln!("{}: {e}", cli.command.name());
            e.exit_code()
        }
    }
}
