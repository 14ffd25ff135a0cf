//! Tabular outputs: the spillover table, ADF results, rolling index rows,
//! SEA rows, and regression summaries.

use std::fmt::Write as _;

use spillover_core::adf::AdfResult;
use spillover_core::regress::RegressionFit;
use spillover_core::sea::SeaResult;
use spillover_core::spillover::{AveragedIndex, SpilloverTable};

use crate::error::{CliError, Result};
use crate::io::format_float;

/// The spillover table in its canonical layout: N x N block, a "To Others"
/// column, a "From Others" row, and the total index in the corner cell.
pub fn spillover_table_csv(table: &SpilloverTable) -> String {
    let n = table.locations.len();
    let mut out = String::new();
    let _ = write!(out, "location");
    for loc in &table.locations {
        let _ = write!(out, ",{loc}");
    }
    out.push_str(",To Others\n");
    for i in 0..n {
        let _ = write!(out, "{}", table.locations[i]);
        for j in 0..n {
            let _ = write!(out, ",{}", format_float(table.shares_pct[(i, j)]));
        }
        let _ = writeln!(out, ",{}", format_float(table.to_others[i]));
    }
    out.push_str("From Others");
    for j in 0..n {
        let _ = write!(out, ",{}", format_float(table.from_others[j]));
    }
    let _ = writeln!(out, ",{}", format_float(table.total));
    out
}

/// Structured form of the spillover table (versioned JSON).
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct TableDocument {
    pub format_version: u32,
    #[serde(flatten)]
    pub table: SpilloverTable,
}

pub const TABLE_FORMAT_VERSION: u32 = 1;

pub fn spillover_table_json(table: &SpilloverTable) -> Result<String> {
    let doc = TableDocument { format_version: TABLE_FORMAT_VERSION, table: table.clone() };
    let mut text = serde_json::to_string_pretty(&doc)
        .map_err(|e| CliError::data(format!("table serialization failed: {e}")))?;
    text.push('\n');
    Ok(text)
}

pub fn spillover_table_from_json(bytes: &[u8]) -> Result<SpilloverTable> {
    let doc: TableDocument = serde_json::from_slice(bytes)
        .map_err(|e| CliError::data(format!("cannot parse spillover table: {e}")))?;
    if doc.format_version != TABLE_FORMAT_VERSION {
        return Err(CliError::data(format!(
            "unsupported table document version {}",
            doc.format_version
        )));
    }
    Ok(doc.table)
}

/// ADF results in the Location / Statistic / p-value layout.
pub fn adf_table_csv(rows: &[(String, AdfResult)]) -> String {
    let mut out = String::from("location,statistic,p_value\n");
    for (location, result) in rows {
        let _ = writeln!(
            out,
            "{location},{:.2},{}",
            result.statistic, result.p_value
        );
    }
    out
}

/// Rolling or averaged index rows: year, value, contributing window count.
pub fn index_csv(index: &AveragedIndex) -> String {
    let mut out = String::from("year,value,n_windows\n");
    for (i, &year) in index.years.iter().enumerate() {
        match index.mean[i] {
            Some(v) => {
                let _ = writeln!(out, "{year},{},{}", format_float(v), index.n_windows[i]);
            }
            None => {
                let _ = writeln!(out, "{year},,0");
            }
        }
    }
    out
}

/// Single-window index rows (n_windows is 1 where the fit succeeded).
pub fn single_index_csv(rows: &[(i32, Option<f64>)]) -> String {
    let mut out = String::from("year,value,n_windows\n");
    for &(year, value) in rows {
        match value {
            Some(v) => {
                let _ = writeln!(out, "{year},{},1", format_float(v));
            }
            None => {
                let _ = writeln!(out, "{year},,0");
            }
        }
    }
    out
}

/// SEA rows matching the plotting layout.
pub fn sea_csv(result: &SeaResult) -> String {
    let mut out = String::from(
        "lag,composite,band10_lo,band10_hi,band05_lo,band05_hi,band01_lo,band01_hi,significant_at_05\n",
    );
    let fmt_band = |v: f64| -> String {
        if v == f64::NEG_INFINITY {
            String::new()
        } else {
            format_float(v)
        }
    };
    for (i, lag) in result.lags().enumerate() {
        let _ = writeln!(
            out,
            "{lag},{},{},{},{},{},{},{},{}",
            format_float(result.composite[i]),
            fmt_band(result.bands[0].lo),
            fmt_band(result.bands[0].hi),
            fmt_band(result.bands[1].lo),
            fmt_band(result.bands[1].hi),
            fmt_band(result.bands[2].lo),
            fmt_band(result.bands[2].hi),
            result.flags_05[i]
        );
    }
    out
}

/// One regression rendered the way the summary tables print: estimate,
/// standard error in parentheses, stars, and the sample size.
pub fn regression_csv(fit: &RegressionFit) -> String {
    let mut out = String::from("term,estimate\n");
    for (i, label) in fit.labels.iter().enumerate() {
        let _ = writeln!(
            out,
            "{label},\"{:.3} ({:.3}){}\"",
            fit.coefficients[i],
            fit.std_errors[i],
            fit.stars(i)
        );
    }
    let _ = writeln!(out, "N,{}", fit.n);
    out
}

/// Several fits side by side (one column per model), same layout.
pub fn regression_comparison_csv(fits: &[(String, &RegressionFit)]) -> String {
    let mut out = String::from("term");
    for (name, _) in fits {
        let _ = write!(out, ",{name}");
    }
    out.push('\n');
    let labels = &fits[0].1.labels;
    for (i, label) in labels.iter().enumerate() {
        let _ = write!(out, "{label}");
        for (_, fit) in fits {
            let _ = write!(
                out,
                ",\"{:.3} ({:.3}){}\"",
                fit.coefficients[i],
                fit.std_errors[i],
                fit.stars(i)
            );
        }
        out.push('\n');
    }
    out.push_str("N");
    for (_, fit) in fits {
        let _ = write!(out, ",{}", fit.n);
    }
    out.push('\n');
    out
}

/// Full-precision structured form of one or more regression fits.
pub fn regression_json(fits: &[(String, &RegressionFit)]) -> Result<String> {
    #[derive(serde::Serialize)]
    struct Entry<'a> {
        name: &'a str,
        #[serde(flatten)]
        fit: &'a RegressionFit,
    }
    let entries: Vec<Entry> = fits
        .iter()
        .map(|(name, fit)| Entry { name, fit })
        .collect();
    let mut text = serde_json::to_string_pretty(&entries)
        .map_err(|e| CliError::data(format!("regression serialization failed: {e}")))?;
    text.push('\n');
    Ok(text)
}

/// Quantile-coefficient rows for coefficient-by-percentile plots:
/// (tau, coefficient, lower, upper) with a normal-approximation 95% band.
pub fn quantile_coefficients_csv(fits: &[(f64, &RegressionFit)], term_index: usize) -> String {
    let mut out = String::from("tau,coefficient,lower,upper\n");
    for &(tau, fit) in fits {
        let c = fit.coefficients[term_index];
        let half = 1.96 * fit.std_errors[term_index];
        let _ = writeln!(
            out,
            "{},{},{},{}",
            format_float(tau),
            format_float(c),
            format_float(c - half),
            format_float(c + half)
        );
    }
    out
}
