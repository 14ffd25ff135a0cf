//! IO, file formats, run configuration, and the command-line pipeline
//! around `spillover-core`.

pub mod commands;
pub mod config;
pub mod error;
pub mod formats;
pub mod io;
pub mod manifest;

use clap::{Parser, Subcommand};

use crate::error::Result;

#[derive(Debug, Parser)]
#[command(
    name = "spillover",
    version,
    about = "Spillover analysis of multi-location price panels: VAR estimation, forecast-error \
             variance decomposition, directional spillover indices, network exports, and the \
             supporting inferential toolkit."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the full pipeline from a config file into a run directory.
    Pipeline(commands::pipeline::PipelineArgs),
    /// Load, clean, and re-serialize a panel.
    Ingest(commands::ingest::IngestArgs),
    /// Column-wise unit-root tests.
    Adf(commands::adf::AdfArgs),
    /// One spillover table (full sample or trailing window).
    Spillover(commands::spillover::SpilloverArgs),
    /// Rolling spillover index over a window set, plus the average.
    Rolling(commands::rolling::RollingArgs),
    /// Threshold a spillover table into a renderer-ready graph file.
    Network(commands::network::NetworkArgs),
    /// OLS of the index on log fatalities and CPI with Newey-West errors.
    Regress(commands::regress::RegressArgs),
    /// Quantile regressions with bootstrapped standard errors.
    Quantreg(commands::quantreg::QuantregArgs),
    /// Superposed epoch analysis around conflict years.
    Sea(commands::sea::SeaArgs),
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Pipeline(args) => commands::pipeline::run(args),
        Command::Ingest(args) => commands::ingest::run(args),
        Command::Adf(args) => commands::adf::run(args),
        Command::Spillover(args) => commands::spillover::run(args),
        Command::Rolling(args) => commands::rolling::run(args),
        Command::Network(args) => commands::network::run(args),
        Command::Regress(args) => commands::regress::run(args),
        Command::Quantreg(args) => commands::quantreg::run(args),
        Command::Sea(args) => commands::sea::run(args),
    }
}
