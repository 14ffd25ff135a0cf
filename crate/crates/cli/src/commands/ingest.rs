//! `ingest`: load, clean, and re-serialize a panel.

use std::path::PathBuf;

use clap::Args;

use super::{prepare_panel, write_output, PanelArgs};
use crate::error::Result;

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub panel: PanelArgs,
    /// Winsorization fraction (e.g. 0.01); omit to skip clipping.
    #[arg(long)]
    pub winsorize: Option<f64>,
    /// First-difference the panel after cleaning.
    #[arg(long)]
    pub difference: bool,
    /// Where to write the re-serialized panel.
    #[arg(long)]
    pub output: PathBuf,
}

pub fn run(args: &IngestArgs) -> Result<()> {
    let (raw, report) = args.panel.load()?;
    for gap in &report.gaps {
        eprintln!("warning: gap in year sequence at {gap}");
    }
    if report.dropped_rows > 0 {
        let (from, to) = report.kept_span.unwrap();
        eprintln!(
            "warning: truncated to the longest contiguous block {from}-{to} ({} rows dropped)",
            report.dropped_rows
        );
    }
    let prepared = prepare_panel(&raw, args.winsorize, args.difference)?;
    let mut bytes = Vec::new();
    crate::io::save_panel(&prepared, &mut bytes, args.panel.delimiter_byte()?)?;
    write_output(&args.output, &bytes)?;
    eprintln!(
        "ingested {} years x {} locations ({})",
        prepared.len(),
        prepared.n_locations(),
        prepared.lineage_string()
    );
    Ok(())
}
