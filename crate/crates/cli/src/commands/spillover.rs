//! `spillover`: one spillover table from the full differenced sample or a
//! trailing window.

use std::path::PathBuf;

use clap::Args;
use spillover_core::fevd::{fevd, FevdMethod};
use spillover_core::spillover::spillover_table;
use spillover_core::var::fit_var;

use super::{prepare_panel, write_output, PanelArgs};
use crate::config::parse_method;
use crate::error::{CliError, Result};
use crate::formats::{model, tables};

#[derive(Debug, Args)]
pub struct SpilloverArgs {
    #[command(flatten)]
    pub panel: PanelArgs,
    /// VAR lag order.
    #[arg(long, default_value_t = 1)]
    pub order: usize,
    /// Forecast horizon for the variance decomposition.
    #[arg(long, default_value_t = 10)]
    pub horizon: usize,
    /// Decomposition: cholesky, generalized, or generalized-target-scaled.
    #[arg(long, default_value = "generalized")]
    pub method: String,
    /// Fit on the trailing window of this many (differenced) years instead
    /// of the full sample.
    #[arg(long)]
    pub window: Option<usize>,
    /// Terminal year of the window (defaults to the last year).
    #[arg(long)]
    pub end_year: Option<i32>,
    /// Winsorization fraction applied before differencing.
    #[arg(long)]
    pub winsorize: Option<f64>,
    /// Input is already differenced; skip the differencing step.
    #[arg(long)]
    pub already_differenced: bool,
    /// Output table in the canonical layout (delimited text).
    #[arg(long)]
    pub output: PathBuf,
    /// Also write the structured table document here.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Also write the fitted model document here.
    #[arg(long)]
    pub emit_model: Option<PathBuf>,
}

pub fn compute_table(
    panel: &spillover_core::panel::PricePanel,
    order: usize,
    horizon: usize,
    method: FevdMethod,
) -> Result<(spillover_core::spillover::SpilloverTable, spillover_core::var::VarModel)> {
    let model = fit_var(panel, order).map_err(|e| CliError::numerical(e.to_string()))?;
    let mut d = fevd(&model, horizon, method).map_err(|e| CliError::numerical(e.to_string()))?;
    if method != FevdMethod::Cholesky {
        d = d.normalize().map_err(|e| CliError::numerical(e.to_string()))?;
    }
    let table = spillover_table(&d).map_err(|e| CliError::numerical(e.to_string()))?;
    Ok((table, model))
}

pub fn run(args: &SpilloverArgs) -> Result<()> {
    let method = parse_method(&args.method)?;
    let (raw, _) = args.panel.load()?;
    let diff = prepare_panel(&raw, args.winsorize, !args.already_differenced)?;

    let fit_panel = match args.window {
        None => diff.clone(),
        Some(window) => {
            if window > diff.len() {
                return Err(CliError::config(format!(
                    "window {window} exceeds the differenced sample length {}",
                    diff.len()
                )));
            }
            let end_idx = match args.end_year {
                None => diff.len() - 1,
                Some(year) => diff
                    .years()
                    .iter()
                    .position(|&y| y == year)
                    .ok_or_else(|| {
                        CliError::config(format!("end year {year} not in the differenced sample"))
                    })?,
            };
            if end_idx + 1 < window {
                return Err(CliError::config(format!(
                    "window {window} does not fit before year {}",
                    diff.years()[end_idx]
                )));
            }
            diff.slice_rows(end_idx + 1 - window, end_idx + 1)
        }
    };

    let (table, model) = compute_table(&fit_panel, args.order, args.horizon, method)?;
    write_output(&args.output, tables::spillover_table_csv(&table).as_bytes())?;
    if let Some(path) = &args.json {
        write_output(path, tables::spillover_table_json(&table)?.as_bytes())?;
    }
    if let Some(path) = &args.emit_model {
        write_output(path, model::to_json(&model)?.as_bytes())?;
    }
    eprintln!("total spillover: {:.2}", table.total);
    Ok(())
}
