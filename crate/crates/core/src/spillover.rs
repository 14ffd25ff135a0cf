//! Spillover aggregation: the directional table, pairwise nets, rolling
//! windows, and window-set averaging.
//!
//! All aggregates are in percentage points. For a normalized share matrix
//! the total index lies in [0, 100]: it is the average share of
//! forecast-error variance that crosses market boundaries.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Warning};
use crate::fevd::{fevd, FevdMatrix, FevdMethod};
use crate::linalg::Mat;
use crate::panel::PricePanel;
use crate::var::{fit_var, min_rows_for_fit};

/// Directional spillover table in percentage points.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpilloverTable {
    pub locations: Vec<String>,
    /// Share matrix scaled to percentage points (row = source, column = target).
    pub shares_pct: Mat,
    /// Off-diagonal row sums: what each location sends to the rest.
    pub to_others: Vec<f64>,
    /// Off-diagonal column sums: what each location receives.
    pub from_others: Vec<f64>,
    /// `to_others - from_others`; positive marks a net transmitter.
    pub net: Vec<f64>,
    /// Average cross-location share.
    pub total: f64,
    pub horizon: usize,
    pub method: FevdMethod,
}

/// Aggregate a share matrix into the directional table.
///
/// Generalized shares must be normalized first; Cholesky shares already
/// decompose each target's variance.
pub fn spillover_table(d: &FevdMatrix) -> Result<SpilloverTable, Error> {
    if !(d.normalized || d.method == FevdMethod::Cholesky) {
        return Err(Error::UnnormalizedShares);
    }
    let n = d.n();
    let shares_pct = d.shares.scale(100.0);
    let mut to_others = alloc::vec![0.0; n];
    let mut from_others = alloc::vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let v = shares_pct[(i, j)];
            to_others[i] += v;
            from_others[j] += v;
        }
    }
    let total = from_others.iter().sum::<f64>() / n as f64;
    let net: Vec<f64> = to_others
        .iter()
        .zip(&from_others)
        .map(|(t, f)| t - f)
        .collect();
    Ok(SpilloverTable {
        locations: d.locations.clone(),
        shares_pct,
        to_others,
        from_others,
        net,
        total,
        horizon: d.horizon,
        method: d.method,
    })
}

/// Signed pairwise net spillover `d_ij - d_ji` in percentage points.
pub fn net_pairwise(table: &SpilloverTable, i: usize, j: usize) -> Result<f64, Error> {
    if i == j {
        return Err(Error::SamePair);
    }
    Ok(table.shares_pct[(i, j)] - table.shares_pct[(j, i)])
}

/// Per-terminal-year spillover tables over a sliding window.
#[derive(Debug, Clone)]
pub struct RollingSpillover {
    pub window: usize,
    pub end_years: Vec<i32>,
    /// One entry per terminal year; `None` records a window whose fit
    /// failed (surfaced in `warnings`), not a silent skip.
    pub tables: Vec<Option<SpilloverTable>>,
    pub warnings: Vec<Warning>,
}

impl RollingSpillover {
    /// The total-index series as (terminal year, value) pairs.
    pub fn index(&self) -> Vec<(i32, Option<f64>)> {
        self.end_years
            .iter()
            .zip(&self.tables)
            .map(|(&y, t)| (y, t.as_ref().map(|tab| tab.total)))
            .collect()
    }
}

fn check_window(window: usize, n: usize, p: usize, t: usize) -> Result<(), Error> {
    let needed = p + min_rows_for_fit(n, p, true);
    if window < needed || window > t {
        return Err(Error::InfeasibleWindow { window, vars: n, order: p, needed });
    }
    Ok(())
}

/// Fit a VAR on each trailing window of the (differenced) panel and compute
/// its spillover table.
pub fn rolling_spillover(
    panel: &PricePanel,
    window: usize,
    lag_order: usize,
    horizon: usize,
    method: FevdMethod,
) -> Result<RollingSpillover, Error> {
    if horizon == 0 {
        return Err(Error::InvalidHorizon);
    }
    if lag_order == 0 {
        return Err(Error::ZeroLagOrder);
    }
    let t = panel.len();
    check_window(window, panel.n_locations(), lag_order, t)?;

    let mut end_years = Vec::with_capacity(t - window + 1);
    let mut tables = Vec::with_capacity(t - window + 1);
    let mut warnings = Vec::new();
    for end in (window - 1)..t {
        let end_year = panel.years()[end];
        end_years.push(end_year);
        let slice = panel.slice_rows(end + 1 - window, end + 1);
        let result = fit_var(&slice, lag_order)
            .and_then(|model| fevd(&model, horizon, method))
            .and_then(|d| {
                if d.method == FevdMethod::Cholesky {
                    Ok(d)
                } else {
                    d.normalize()
                }
            })
            .and_then(|d| spillover_table(&d));
        match result {
            Ok(table) => tables.push(Some(table)),
            Err(e) => {
                warnings.push(Warning::WindowFailed {
                    end_year,
                    reason: e.to_string(),
                });
                tables.push(None);
            }
        }
    }
    Ok(RollingSpillover { window, end_years, tables, warnings })
}

/// Mean total-spillover index across a set of window lengths, aligned by
/// terminal year.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AveragedIndex {
    pub years: Vec<i32>,
    /// Mean over contributing windows; `None` where every window failed.
    pub mean: Vec<Option<f64>>,
    /// Number of windows contributing per year.
    pub n_windows: Vec<usize>,
    pub windows: Vec<usize>,
}

/// Average the rolling total index over several window lengths.
///
/// Every window length is validated up front; years where an individual
/// window failed contribute nothing to that year's mean.
pub fn average_over_windows(
    panel: &PricePanel,
    windows: &[usize],
    lag_order: usize,
    horizon: usize,
    method: FevdMethod,
) -> Result<AveragedIndex, Error> {
    if windows.is_empty() {
        return Err(Error::EmptyWindowSet);
    }
    let mut sorted_windows = windows.to_vec();
    sorted_windows.sort_unstable();
    sorted_windows.dedup();
    for &w in &sorted_windows {
        check_window(w, panel.n_locations(), lag_order, panel.len())?;
    }

    let first_year = panel.years()[sorted_windows[0] - 1];
    let last_year = *panel.years().last().unwrap();
    let n_years = (last_year - first_year + 1) as usize;
    let mut sums = alloc::vec![0.0; n_years];
    let mut counts = alloc::vec![0usize; n_years];
    for &w in &sorted_windows {
        let rolled = rolling_spillover(panel, w, lag_order, horizon, method)?;
        for (year, value) in rolled.index() {
            if let Some(v) = value {
                let slot = (year - first_year) as usize;
                sums[slot] += v;
                counts[slot] += 1;
            }
        }
    }
    let years: Vec<i32> = (0..n_years).map(|k| first_year + k as i32).collect();
    let mean: Vec<Option<f64>> = sums
        .iter()
        .zip(&counts)
        .map(|(&s, &c)| if c > 0 { Some(s / c as f64) } else { None })
        .collect();
    Ok(AveragedIndex { years, mean, n_windows: counts, windows: sorted_windows })
}
