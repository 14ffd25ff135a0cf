//! `sea`: superposed epoch analysis of the averaged index around conflict
//! years.

use std::path::PathBuf;

use clap::Args;
use spillover_core::sea::{event_sets, superposed_epoch, EpochSpec};

use super::{parse_year_ranges, write_output};
use crate::config::parse_variant;
use crate::error::{CliError, Result};
use crate::formats::tables::sea_csv;

#[derive(Debug, Args)]
pub struct SeaArgs {
    /// Averaged index CSV (year,value,n_windows) from `rolling`.
    #[arg(long)]
    pub index: PathBuf,
    /// Event construction: start, full-period, or midpoint.
    #[arg(long, default_value = "start")]
    pub variant: String,
    /// Conflict spans, e.g. "1618..1648,1688..1697".
    #[arg(long)]
    pub spans: String,
    /// Year ranges excluded from the full-period variant.
    #[arg(long)]
    pub exclude: Option<String>,
    /// Epoch half-width in years.
    #[arg(long, default_value_t = 5)]
    pub half_width: usize,
    /// Bootstrap resamples for the significance bands.
    #[arg(long, default_value_t = 10_000)]
    pub n_boot: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Upper-tail-only thresholds.
    #[arg(long)]
    pub one_sided: bool,
    #[arg(long)]
    pub output: PathBuf,
}

pub fn run(args: &SeaArgs) -> Result<()> {
    let variant = parse_variant(&args.variant)?;
    let spans = parse_year_ranges(&args.spans)?;
    let exclusions = match &args.exclude {
        Some(text) => parse_year_ranges(text)?,
        None => Vec::new(),
    };
    let index = super::read_index_csv(&args.index)?;
    let years: Vec<i32> = index.iter().map(|&(y, _)| y).collect();
    for w in years.windows(2) {
        if w[1] != w[0] + 1 {
            return Err(CliError::data(format!(
                "index series has a gap between {} and {}; SEA needs contiguous years",
                w[0], w[1]
            )));
        }
    }
    let values: Vec<f64> = index.iter().map(|&(_, v)| v).collect();

    let events =
        event_sets(&spans, variant, &exclusions).map_err(|e| CliError::config(e.to_string()))?;
    let mut spec = EpochSpec::new(events, args.half_width, args.n_boot, args.seed);
    spec.one_sided = args.one_sided;
    let result =
        superposed_epoch(&years, &values, &spec).map_err(|e| CliError::numerical(e.to_string()))?;
    for warning in &result.warnings {
        eprintln!("warning: {warning}");
    }
    write_output(&args.output, sea_csv(&result).as_bytes())?;
    let n_flagged = result.flags_05.iter().filter(|&&f| f).count();
    eprintln!(
        "{} epochs composited; {} of {} lags outside the 5% band",
        result.used_epochs,
        n_flagged,
        result.flags_05.len()
    );
    Ok(())
}
