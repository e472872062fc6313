//! Command-line front end for the excitonflow library: stationary-state
//! reports, master-equation trajectories, parameter sweeps, and the dark
//! subspace of a configured model.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::ModelConfig;

/// How a command run can fail, mapped onto the process exit code: 2 for
/// configuration problems, 3 for numerical-quality failures.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<excitonflow::Error> for Failure {
    fn from(e: excitonflow::Error) -> Self {
        use excitonflow::Error::*;
        match e {
            Domain(_) | Configuration(_) | DegenerateModel(_) | Assumption(_)
            | TimeStepTooLarge { .. } => Failure::Config(e.to_string()),
            AmbiguousKernel { .. } | IntegrationQuality(_) | FitFailure(_) => {
                Failure::Numerical(e.to_string())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct CommonArgs {
    /// Model configuration file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Parser)]
#[command(
    name = "excitonflow",
    about = "Exciton transport through a degenerate three-level system coupled to three thermal reservoirs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Stationary state by every applicable method, with flow and kernel data.
    Stationary(CommonArgs),
    /// Integrate the master equation from a chosen initial state.
    Evolve {
        #[command(flatten)]
        common: CommonArgs,
        /// Initial state: ground, sink, bright_chi, bright_psi, dark, or custom:PATH
        /// (a JSON matrix of [re, im] pairs).
        #[arg(long, default_value = "ground")]
        initial: String,
    },
    /// Stationary flow across the parameter grid in the [sweep] section.
    Sweep(CommonArgs),
    /// Rank and basis of the dark subspace of the coupling geometry.
    Dark(CommonArgs),
}

fn run(cli: Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Stationary(a) => {
            let cfg = ModelConfig::load(&a.config)?;
            commands::cmd_stationary(&cfg, a.format, a.out.as_ref())
        }
        Command::Evolve { common: a, initial } => {
            let cfg = ModelConfig::load(&a.config)?;
            commands::cmd_evolve(&cfg, initial, a.format, a.out.as_ref())
        }
        Command::Sweep(a) => {
            let cfg = ModelConfig::load(&a.config)?;
            commands::cmd_sweep(&cfg, a.format, a.out.as_ref())
        }
        Command::Dark(a) => {
            let cfg = ModelConfig::load(&a.config)?;
            commands::cmd_dark(&cfg, a.format, a.out.as_ref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
