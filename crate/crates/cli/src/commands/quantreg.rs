//! `quantreg`: quantile regressions of the averaged index with
//! bootstrapped standard errors.

use std::path::PathBuf;

use clap::Args;
use spillover_core::quantile::quantile_fit;
use spillover_core::regress::RegressionFit;

use super::regress::{assemble_designs, cpi_control, load_fatalities};
use super::{parse_year_ranges, write_output, PanelArgs};
use crate::error::{CliError, Result};
use crate::formats::tables;
use crate::io::CatalogSchema;

#[derive(Debug, Args)]
pub struct QuantregArgs {
    /// Averaged index CSV (year,value,n_windows) from `rolling`.
    #[arg(long)]
    pub index: PathBuf,
    #[command(flatten)]
    pub panel: PanelArgs,
    #[arg(long)]
    pub catalog: PathBuf,
    #[arg(long, value_delimiter = ',', default_values_t = vec![3u32, 4u32])]
    pub regions: Vec<u32>,
    /// Excluded year ranges, e.g. "1628..1648".
    #[arg(long)]
    pub exclude: Option<String>,
    /// Quantile levels to fit.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.25, 0.5, 0.75, 0.9])]
    pub quantiles: Vec<f64>,
    /// Bootstrap replicates for the standard errors.
    #[arg(long, default_value_t = 1000)]
    pub bootstrap: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.01)]
    pub winsorize: f64,
    #[arg(long, default_value_t = 0)]
    pub cpi_window: usize,
    #[arg(long)]
    pub output_dir: PathBuf,
}

pub fn fit_quantile_set(
    design: &spillover_core::regress::RegressionDesign,
    quantiles: &[f64],
    bootstrap: usize,
    seed: u64,
) -> Result<Vec<(f64, RegressionFit)>> {
    quantiles
        .iter()
        .map(|&tau| {
            quantile_fit(design, tau, bootstrap, seed)
                .map(|fit| (tau, fit))
                .map_err(|e| CliError::numerical(format!("tau {tau}: {e}")))
        })
        .collect()
}

pub fn write_quantile_outputs(
    output_dir: &std::path::Path,
    tag: &str,
    fits: &[(f64, RegressionFit)],
) -> Result<()> {
    let named: Vec<(String, &RegressionFit)> = fits
        .iter()
        .map(|(tau, fit)| (format!("q{:02}", (tau * 100.0).round() as u32), fit))
        .collect();
    write_output(
        &output_dir.join(format!("quantreg_{tag}.csv")),
        tables::regression_comparison_csv(&named).as_bytes(),
    )?;
    write_output(
        &output_dir.join(format!("quantreg_{tag}.json")),
        tables::regression_json(&named)?.as_bytes(),
    )?;
    let by_tau: Vec<(f64, &RegressionFit)> = fits.iter().map(|(t, f)| (*t, f)).collect();
    // Coefficient-by-percentile rows for the log-fatalities term.
    write_output(
        &output_dir.join(format!("quantile_coefficients_{tag}.csv")),
        tables::quantile_coefficients_csv(&by_tau, 1).as_bytes(),
    )?;
    Ok(())
}

pub fn run(args: &QuantregArgs) -> Result<()> {
    for &q in &args.quantiles {
        if !(q > 0.0 && q < 1.0) {
            return Err(CliError::config(format!("quantile {q} outside (0, 1)")));
        }
    }
    let exclusions = match &args.exclude {
        Some(text) => parse_year_ranges(text)?,
        None => Vec::new(),
    };
    let index = super::read_index_csv(&args.index)?;
    let (raw, _) = args.panel.load()?;
    let (winsorized, _) = raw
        .winsorize(args.winsorize)
        .map_err(|e| CliError::config(e.to_string()))?;
    let cpi = cpi_control(&winsorized, args.cpi_window);
    let (fatalities, _, _) =
        load_fatalities(&args.catalog, &CatalogSchema::default(), &args.regions)?;

    let designs = assemble_designs(&index, &fatalities, &cpi, &exclusions)?;
    let fits = fit_quantile_set(&designs.full, &args.quantiles, args.bootstrap, args.seed)?;
    write_quantile_outputs(&args.output_dir, "full", &fits)?;
    if let Some(design) = &designs.excluded {
        let fits = fit_quantile_set(design, &args.quantiles, args.bootstrap, args.seed)?;
        write_quantile_outputs(&args.output_dir, "excl", &fits)?;
    }
    Ok(())
}
