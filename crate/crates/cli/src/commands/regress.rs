//! `regress`: OLS of the averaged spillover index on log fatalities and the
//! CPI level, with Newey-West errors.

use std::path::PathBuf;

use clap::Args;
use spillover_core::conflict::{fatalities_per_year, filter_regions, FatalitySeries};
use spillover_core::panel::PricePanel;
use spillover_core::regress::{build_design, ols_newey_west, RegressionDesign};
use spillover_core::scatter::{scatter_fit_summary, CurveMode};

use super::{parse_year_ranges, write_output, PanelArgs};
use crate::error::{CliError, Result};
use crate::formats::tables;
use crate::io::CatalogSchema;

#[derive(Debug, Args)]
pub struct RegressArgs {
    /// Averaged index CSV (year,value,n_windows) from `rolling`.
    #[arg(long)]
    pub index: PathBuf,
    #[command(flatten)]
    pub panel: PanelArgs,
    /// Conflict catalog file.
    #[arg(long)]
    pub catalog: PathBuf,
    /// Region codes to keep.
    #[arg(long, value_delimiter = ',', default_values_t = vec![3u32, 4u32])]
    pub regions: Vec<u32>,
    /// Excluded year ranges for the second model, e.g. "1628..1648".
    #[arg(long)]
    pub exclude: Option<String>,
    /// Newey-West lag; omit for the floor(4 (n/100)^{2/9}) rule.
    #[arg(long)]
    pub nw_lag: Option<usize>,
    /// Winsorization fraction for the CPI control (matches the pipeline).
    #[arg(long, default_value_t = 0.01)]
    pub winsorize: f64,
    /// Trailing-window length for the CPI control; 0 uses the year-t level.
    #[arg(long, default_value_t = 0)]
    pub cpi_window: usize,
    #[arg(long)]
    pub output_dir: PathBuf,
}

/// Cross-city mean CPI level per year, optionally averaged over a trailing
/// window.
pub fn cpi_control(panel: &PricePanel, window: usize) -> Vec<(i32, f64)> {
    let means = panel.yearly_means();
    if window <= 1 {
        return means;
    }
    means
        .iter()
        .enumerate()
        .map(|(i, &(year, _))| {
            let from = i.saturating_sub(window - 1);
            let slice: Vec<f64> = means[from..=i].iter().map(|&(_, m)| m).collect();
            (year, spillover_core::num::mean(&slice))
        })
        .collect()
}

pub fn load_fatalities(
    catalog: &PathBuf,
    schema: &CatalogSchema,
    regions: &[u32],
) -> Result<(FatalitySeries, usize, usize)> {
    let file = std::fs::File::open(catalog)
        .map_err(|e| CliError::data(format!("cannot open {}: {e}", catalog.display())))?;
    let (events, report) = crate::io::parse_catalog(file, schema, b',')?;
    let kept = filter_regions(&events, regions);
    let n_kept = kept.len();
    let series =
        fatalities_per_year(&kept).map_err(|e| CliError::data(e.to_string()))?;
    Ok((series, n_kept, report.dropped_missing_fatalities))
}

pub struct AssembledDesigns {
    pub full: RegressionDesign,
    pub excluded: Option<RegressionDesign>,
}

pub fn assemble_designs(
    index: &[(i32, f64)],
    fatalities: &FatalitySeries,
    cpi: &[(i32, f64)],
    exclusions: &[(i32, i32)],
) -> Result<AssembledDesigns> {
    let full = build_design(index, fatalities, cpi, &[])
        .map_err(|e| CliError::data(e.to_string()))?;
    let excluded = if exclusions.is_empty() {
        None
    } else {
        Some(
            build_design(index, fatalities, cpi, exclusions)
                .map_err(|e| CliError::data(e.to_string()))?,
        )
    };
    Ok(AssembledDesigns { full, excluded })
}

/// Scatter summary (r, p, fitted curve sampled on a grid) as JSON.
pub fn scatter_json(design: &RegressionDesign, mode: CurveMode) -> Result<String> {
    let x: Vec<f64> = (0..design.n()).map(|i| design.regressors[(i, 1)]).collect();
    let fit = scatter_fit_summary(&x, &design.response, mode)
        .map_err(|e| CliError::numerical(e.to_string()))?;
    let lo = x.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let grid: Vec<(f64, f64)> = (0..=100)
        .map(|k| {
            let xv = lo + (hi - lo) * k as f64 / 100.0;
            (xv, fit.curve.predict(xv))
        })
        .collect();
    #[derive(serde::Serialize)]
    struct ScatterDoc {
        r: f64,
        p_value: f64,
        n: usize,
        curve: Vec<(f64, f64)>,
    }
    let mut text = serde_json::to_string_pretty(&ScatterDoc {
        r: fit.r,
        p_value: fit.p_value,
        n: fit.n,
        curve: grid,
    })
    .map_err(|e| CliError::data(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

pub fn run(args: &RegressArgs) -> Result<()> {
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
    let (fatalities, kept, dropped) =
        load_fatalities(&args.catalog, &CatalogSchema::default(), &args.regions)?;
    eprintln!("catalog: {kept} events kept, {dropped} rows dropped (missing fatalities)");

    let designs = assemble_designs(&index, &fatalities, &cpi, &exclusions)?;
    let full_fit = ols_newey_west(&designs.full, args.nw_lag)
        .map_err(|e| CliError::numerical(e.to_string()))?;
    let mut fits = vec![("full_sample".to_string(), full_fit)];
    if let Some(design) = &designs.excluded {
        let fit = ols_newey_west(design, args.nw_lag)
            .map_err(|e| CliError::numerical(e.to_string()))?;
        fits.push(("excluding_ranges".to_string(), fit));
    }

    let named: Vec<(String, &spillover_core::regress::RegressionFit)> =
        fits.iter().map(|(n, f)| (n.clone(), f)).collect();
    write_output(
        &args.output_dir.join("ols.csv"),
        tables::regression_comparison_csv(&named).as_bytes(),
    )?;
    write_output(
        &args.output_dir.join("ols.json"),
        tables::regression_json(&named)?.as_bytes(),
    )?;
    write_output(
        &args.output_dir.join("scatter_full.json"),
        scatter_json(&designs.full, CurveMode::RestrictedCubicSpline { knots: 4 })?.as_bytes(),
    )?;
    if let Some(design) = &designs.excluded {
        write_output(
            &args.output_dir.join("scatter_excl.json"),
            scatter_json(design, CurveMode::Linear)?.as_bytes(),
        )?;
    }
    for (name, fit) in &fits {
        eprintln!("{name}: n = {}, NW lag = {}", fit.n, match fit.method {
            spillover_core::regress::FitMethod::OlsNeweyWest { lag } => lag,
            _ => unreachable!(),
        });
    }
    Ok(())
}
