//! Command-line front end: parse a run configuration, execute experiments and
//! emit machine-readable results.

mod commands;
mod config_file;
mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug)]
pub enum CliError {
    /// Invalid configuration or usage (exit 2).
    Config(String),
    /// I/O or internal failure (exit 1).
    Io(String),
    /// More than half of the trials failed in the solver (exit 3).
    FailureRate { failed: usize, total: usize },
    /// Solver fell below the oracle-ratio gate (exit 4).
    OracleRegression { worst: f64 },
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Config(msg) | Self::Io(msg) => f.write_str(msg),
            Self::FailureRate { failed, total } => {
                write!(f, "solver failed on {failed} of {total} trials (> 50%)")
            }
            Self::OracleRegression { worst } => {
                write!(f, "worst solver/oracle ratio {worst:.6} fell below 0.99")
            }
        }
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            Self::Io(_) => 1,
            Self::Config(_) => 2,
            Self::FailureRate { .. } => 3,
            Self::OracleRegression { .. } => 4,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "irsjam",
    version,
    about = "Secure-link simulator for IRS-assisted MISO transmission with beamforming and artificial-noise jamming"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a parameter sweep and write sweep.csv plus a run manifest.
    Sweep(SweepArgs),
    /// Emit per-iteration solver traces for fixed channel realizations.
    Converge(ConvergeArgs),
    /// Validate both solvers against the exhaustive grid oracle (small L).
    OracleCheck(OracleCheckArgs),
}

#[derive(Args)]
pub struct SweepArgs {
    /// Run configuration file (flat key = value format).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Override the master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the trial count per sweep point.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Comma-separated subset of om,mm,random-phase,no-irs.
    #[arg(long)]
    pub algorithms: Option<String>,
    /// Override any config key (KEY=VALUE, repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Args)]
pub struct ConvergeArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Args)]
pub struct OracleCheckArgs {
    /// Number of reflecting elements (1..=3).
    #[arg(long, default_value_t = 2)]
    pub l: usize,
    /// Random instances to check.
    #[arg(long, default_value_t = 50)]
    pub instances: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Grid points per element.
    #[arg(long, default_value_t = 512)]
    pub resolution: usize,
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Sweep(args) => commands::cmd_sweep(args),
        Command::Converge(args) => commands::cmd_converge(args),
        Command::OracleCheck(args) => commands::cmd_oracle_check(args),
    };
    if let Err(error) = result {
        eprintln!("error: {error}");
        std::process::exit(error.exit_code());
    }
}
