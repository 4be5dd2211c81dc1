//! `qcurv <command> --config path.json --out dir [--seed n]`

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;

#[derive(Parser)]
#[command(name = "qcurv", version, about = "Batch runs for the constant Q-curvature lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// overrides the seed in the config
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Paneitz spectrum, k̄, k_P and its band
    Spectrum(Common),
    /// Gauss–Bonnet, volume, k_P invariance and Adams gap audits
    Audit(Common),
    /// Bubble estimate sweep over λ
    Bubble(Common),
    /// Ψ̂ projection of a bubble field onto the barycenter strata
    Project(Common),
    /// ρ-continuation solve with the monotonicity report
    Solve(Common),
}

/// Failure classes mapped onto exit codes 2 and 3.
#[derive(Debug)]
pub enum Failure {
    /// unreadable or rejected configuration
    Config(String),
    /// library error or failed check
    Run(String),
}

impl From<qcurv_core::Error> for Failure {
    fn from(e: qcurv_core::Error) -> Self {
        use qcurv_core::Error as E;
        match e {
            E::InvalidSpec(_) | E::Forbidden { .. } => Failure::Config(e.to_string()),
            _ => Failure::Run(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Run(format!("i/o: {e}"))
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let (c, cmd): (&Common, fn(&RunConfig) -> Result<(), Failure>) = match &cli.command {
        Command::Spectrum(c) => (c, commands::spectrum::run),
        Command::Audit(c) => (c, commands::audit::run),
        Command::Bubble(c) => (c, commands::bubble::run),
        Command::Project(c) => (c, commands::project::run),
        Command::Solve(c) => (c, commands::solve::run),
    };
    let cfg = RunConfig::load(&c.config, &c.out, c.seed)?;
    std::fs::create_dir_all(&cfg.out)?;
    cmd(&cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Run(msg)) => {
            eprintln!("qcurv: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("qcurv: rejected config: {msg}");
            ExitCode::from(3)
        }
    }
}
