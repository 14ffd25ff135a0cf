//! `rolling`: per-window spillover index series and their average.

use std::path::PathBuf;

use clap::Args;
use spillover_core::fevd::FevdMethod;
use spillover_core::panel::PricePanel;
use spillover_core::spillover::{average_over_windows, rolling_spillover, AveragedIndex, RollingSpillover};

use super::{parse_windows, prepare_panel, write_output, PanelArgs};
use crate::config::parse_method;
use crate::error::{CliError, Result};
use crate::formats::tables;

#[derive(Debug, Args)]
pub struct RollingArgs {
    #[command(flatten)]
    pub panel: PanelArgs,
    /// Window set: "30..40" or "30,35,40".
    #[arg(long, default_value = "30..40")]
    pub windows: String,
    #[arg(long, default_value_t = 1)]
    pub order: usize,
    #[arg(long, default_value_t = 10)]
    pub horizon: usize,
    #[arg(long, default_value = "generalized")]
    pub method: String,
    /// Worker threads across window lengths.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Winsorization fraction applied before differencing.
    #[arg(long)]
    pub winsorize: Option<f64>,
    /// Input is already differenced; skip the differencing step.
    #[arg(long)]
    pub already_differenced: bool,
    /// Directory for window_{w}.csv files and average.csv.
    #[arg(long)]
    pub output_dir: PathBuf,
}

/// Rolling series for every window, computed on `workers` threads; results
/// are merged in window order so output is deterministic.
pub fn roll_window_set(
    panel: &PricePanel,
    windows: &[usize],
    order: usize,
    horizon: usize,
    method: FevdMethod,
    workers: usize,
) -> Result<Vec<RollingSpillover>> {
    let workers = workers.max(1).min(windows.len().max(1));
    if workers == 1 {
        return windows
            .iter()
            .map(|&w| {
                rolling_spillover(panel, w, order, horizon, method)
                    .map_err(|e| CliError::numerical(e.to_string()))
            })
            .collect();
    }
    let mut results: Vec<Option<Result<RollingSpillover>>> = Vec::new();
    results.resize_with(windows.len(), || None);
    let chunk = windows.len().div_ceil(workers);
    std::thread::scope(|scope| {
        for (slot, window_chunk) in results.chunks_mut(chunk).zip(windows.chunks(chunk)) {
            scope.spawn(move || {
                for (out, &w) in slot.iter_mut().zip(window_chunk) {
                    *out = Some(
                        rolling_spillover(panel, w, order, horizon, method)
                            .map_err(|e| CliError::numerical(e.to_string())),
                    );
                }
            });
        }
    });
    results.into_iter().map(|r| r.expect("worker filled slot")).collect()
}

/// Average the per-window index series by terminal year (same contract as
/// the single-threaded averaging in the core crate).
pub fn average_rolled(rolled: &[RollingSpillover]) -> AveragedIndex {
    let first_year = rolled.iter().map(|r| r.end_years[0]).min().unwrap();
    let last_year = rolled
        .iter()
        .map(|r| *r.end_years.last().unwrap())
        .max()
        .unwrap();
    let n_years = (last_year - first_year + 1) as usize;
    let mut sums = vec![0.0; n_years];
    let mut counts = vec![0usize; n_years];
    for r in rolled {
        for (year, value) in r.index() {
            if let Some(v) = value {
                let slot = (year - first_year) as usize;
                sums[slot] += v;
                counts[slot] += 1;
            }
        }
    }
    AveragedIndex {
        years: (0..n_years).map(|k| first_year + k as i32).collect(),
        mean: sums
            .iter()
            .zip(&counts)
            .map(|(&s, &c)| if c > 0 { Some(s / c as f64) } else { None })
            .collect(),
        n_windows: counts,
        windows: rolled.iter().map(|r| r.window).collect(),
    }
}

pub fn run(args: &RollingArgs) -> Result<()> {
    let method = parse_method(&args.method)?;
    let windows = parse_windows(&args.windows)?;
    let (raw, _) = args.panel.load()?;
    let diff = prepare_panel(&raw, args.winsorize, !args.already_differenced)?;

    // Validate the whole set up front (configuration-time feasibility).
    average_over_windows(&diff, &windows, args.order, args.horizon, method)
        .map_err(|e| CliError::config(e.to_string()))?;

    let rolled = roll_window_set(&diff, &windows, args.order, args.horizon, method, args.workers)?;
    for r in &rolled {
        for warning in &r.warnings {
            eprintln!("warning: {warning}");
        }
        write_output(
            &args.output_dir.join(format!("window_{}.csv", r.window)),
            tables::single_index_csv(&r.index()).as_bytes(),
        )?;
    }
    let average = average_rolled(&rolled);
    write_output(
        &args.output_dir.join("average.csv"),
        tables::index_csv(&average).as_bytes(),
    )?;
    Ok(())
}
