//! `network`: spillover table -> thresholded graph -> renderer-ready files.

use std::path::PathBuf;

use clap::Args;
use spillover_core::graph::{apply_threshold, to_graph, ThresholdSpec};

use super::write_output;
use crate::error::{CliError, Result};
use crate::formats::graph::{export, GraphFormat};
use crate::formats::tables::spillover_table_from_json;

#[derive(Debug, Args)]
pub struct NetworkArgs {
    /// Spillover table document (the --json output of `spillover`).
    #[arg(long)]
    pub table: PathBuf,
    /// Coordinate file (label, lat, lon) for geographic layouts.
    #[arg(long)]
    pub coords: Option<PathBuf>,
    /// Drop edges with weight at or below this cutoff (percentage points).
    #[arg(long, default_value_t = 0.2)]
    pub retain: f64,
    /// Emphasize edges with weight above this cutoff.
    #[arg(long, default_value_t = 0.5)]
    pub highlight: f64,
    /// Recompute node sizes from the surviving edges (nets always reflect
    /// the full table).
    #[arg(long)]
    pub recompute_sizes: bool,
    /// Output format: dot, graphml, or json.
    #[arg(long, default_value = "json")]
    pub format: String,
    #[arg(long)]
    pub output: PathBuf,
}

pub fn run(args: &NetworkArgs) -> Result<()> {
    if args.retain < 0.0 || args.highlight < args.retain {
        return Err(CliError::config(
            "highlight cutoff must be at least the retain cutoff, both nonnegative",
        ));
    }
    let format: GraphFormat = args.format.parse()?;
    let bytes = std::fs::read(&args.table)
        .map_err(|e| CliError::data(format!("cannot read {}: {e}", args.table.display())))?;
    let table = spillover_table_from_json(&bytes)?;
    let coords = match &args.coords {
        Some(path) => {
            let file = std::fs::File::open(path)
                .map_err(|e| CliError::data(format!("cannot open {}: {e}", path.display())))?;
            Some(crate::io::load_coordinates(file, b',')?)
        }
        None => None,
    };
    let (graph, warnings) = to_graph(&table, coords.as_ref());
    for warning in warnings {
        eprintln!("warning: {warning}");
    }
    let cut = apply_threshold(
        &graph,
        &ThresholdSpec::new(args.retain, args.highlight),
        args.recompute_sizes,
    );
    write_output(&args.output, &export(&cut, format)?)?;
    eprintln!(
        "{} nodes, {} edges after threshold {}",
        cut.nodes.len(),
        cut.edges.len(),
        args.retain
    );
    Ok(())
}
