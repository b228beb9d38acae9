//! `ucp`: transmission sweeps and analyses for unified Cantor potentials.

mod commands;
mod config;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use ucp_core::UcpError;

use config::Settings;

#[derive(Parser)]
#[command(name = "ucp", version, about = "Quantum transmission through unified Cantor potentials")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    settings: Settings,

    /// Config file (key=value lines or JSON); flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Write the merged settings to this file before running.
    #[arg(long = "save-config", global = true)]
    save_config: Option<PathBuf>,

    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// CSV of T, R and log10 T over a k sweep.
    Transmission,
    /// CSV of validity and T over an (alpha, beta, rho) grid.
    Grid,
    /// CSV of barrier offsets and widths.
    Geometry,
    /// JSON power-law fit of the constant-area reflection at large k.
    Scaling,
    /// JSON sup-norm distances between consecutive stages.
    Saturation,
    /// JSON validity report; exits with 2 when the spec is invalid.
    Validate,
}

const EXIT_INVALID_SPEC: u8 = 2;
const EXIT_ORACLE_INFEASIBLE: u8 = 3;

fn run(cli: Cli) -> Result<u8> {
    let settings = match &cli.config {
        Some(path) => cli.settings.overlay(&Settings::load(path)?)?,
        None => cli.settings.clone(),
    };
    if let Some(path) = &cli.save_config {
        settings.save(path)?;
    }
    let workers = match settings.workers {
        Some(0) | None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
        Some(n) => n,
    };
    let (text, code) = match cli.command {
        Command::Transmission => (commands::transmission(&settings, workers)?, 0),
        Command::Grid => (commands::grid(&settings, workers)?, 0),
        Command::Geometry => (commands::geometry(&settings)?, 0),
        Command::Scaling => (commands::scaling(&settings)?, 0),
        Command::Saturation => (commands::saturation(&settings)?, 0),
        Command::Validate => {
            let (text, valid) = commands::validate(&settings)?;
            (text, if valid { 0 } else { EXIT_INVALID_SPEC })
        }
    };
    match &cli.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(code)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<UcpError>() {
        Some(UcpError::InvalidSpec(_)) => EXIT_INVALID_SPEC,
        Some(UcpError::OracleInfeasible { .. }) => EXIT_ORACLE_INFEASIBLE,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::init();
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
