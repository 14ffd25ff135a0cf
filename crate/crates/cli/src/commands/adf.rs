//! `adf`: column-wise unit-root tests.

use std::path::PathBuf;

use clap::Args;
use spillover_core::adf::adf_test;

use super::{prepare_panel, write_output, PanelArgs};
use crate::config::parse_form;
use crate::error::{CliError, Result};
use crate::formats::tables::adf_table_csv;

#[derive(Debug, Args)]
pub struct AdfArgs {
    #[command(flatten)]
    pub panel: PanelArgs,
    /// Augmentation lag order.
    #[arg(long, default_value_t = 10)]
    pub lags: usize,
    /// Deterministic terms: constant, constant-trend, or none.
    #[arg(long, default_value = "constant")]
    pub form: String,
    /// Winsorization fraction applied before testing.
    #[arg(long)]
    pub winsorize: Option<f64>,
    /// Test first differences instead of levels.
    #[arg(long)]
    pub difference: bool,
    /// Output table (location, statistic, p-value bound).
    #[arg(long)]
    pub output: PathBuf,
}

pub fn run(args: &AdfArgs) -> Result<()> {
    let form = parse_form(&args.form)?;
    let (raw, _) = args.panel.load()?;
    let panel = prepare_panel(&raw, args.winsorize, args.difference)?;
    let mut rows = Vec::new();
    for (j, location) in panel.locations().iter().enumerate() {
        let result = adf_test(&panel.column(j), args.lags, form)
            .map_err(|e| CliError::numerical(format!("{location}: {e}")))?;
        rows.push((location.clone(), result));
    }
    write_output(&args.output, adf_table_csv(&rows).as_bytes())?;
    Ok(())
}
