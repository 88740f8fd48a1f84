//! Command-line front-end: pricing, calibration, surface construction and
//! the rolling implied-rate series.
//!
//! One command per invocation; options come from flags and an optional TOML
//! config file (flags win). `ARBCOST_LOG` (error|warn|info|debug) controls
//! diagnostic verbosity. Errors exit non-zero and print
//! `error[<Name>]: <details>` on stderr.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{CliResult, FileConfig};

#[derive(Debug, Parser)]
#[command(
    name = "arbcost",
    about = "Two-asset binomial pricing with arbitrage transaction costs",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every command.
#[derive(Debug, Args)]
struct CommonArgs {
    /// TOML config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output path (or stem, for surface files). Defaults to stdout where
    /// applicable.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_parser = ["csv", "json"])]
    format: Option<String>,
    /// Calendar days per time unit for maturities and annualised moments.
    #[arg(long)]
    annualization: Option<u32>,
    /// Seed for sampled computations.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Price a European contract on the bivariate cost-adjusted lattice.
    Price(commands::price::PriceArgs),
    /// Calibrate the implied rate, volatility and cost coefficient.
    Calibrate(commands::calibrate::CalibrateArgs),
    /// Build implied-volatility and arbitrage-cost surfaces.
    Surfaces(commands::surfaces::SurfacesArgs),
    /// Rolling-window implied-rate time series from two price histories.
    RfrSeries(commands::rfr::RfrArgs),
}

fn run() -> CliResult<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Price(args) => {
            let file = FileConfig::load(args.common.config.as_deref())?;
            commands::price::run(&args, &file)
        }
        Command::Calibrate(args) => {
            let file = FileConfig::load(args.common.config.as_deref())?;
            commands::calibrate::run(&args, &file)
        }
        Command::Surfaces(args) => {
            let file = FileConfig::load(args.common.config.as_deref())?;
            commands::surfaces::run(&args, &file)
        }
        Command::RfrSeries(args) => {
            let file = FileConfig::load(args.common.config.as_deref())?;
            commands::rfr::run(&args, &file)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(
        env_logger::Env::new()
            .filter("ARBCOST_LOG")
            .default_filter_or("warn"),
    )
    .init();
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error[{}]: {err}", err.name());
            ExitCode::FAILURE
        }
    }
}
