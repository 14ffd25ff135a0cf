//! Augmented Dickey-Fuller unit-root test with embedded finite-sample
//! critical values.
//!
//! The statistic is the t-ratio on the lagged level in
//! `dy_t = a + g*y_{t-1} + sum b_i dy_{t-i} + e_t` (constant form; trend and
//! no-constant variants selectable). P-values are reported as brackets
//! against critical values at 1/5/10% rather than point estimates: the
//! critical values come from response-surface constants in the effective
//! sample size, which is the interpolation the bracket relies on.

use alloc::vec::Vec;

use crate::error::Error;
use crate::linalg::{self, Mat};
use crate::num;

/// Deterministic terms included in the test regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum RegressionForm {
    /// Intercept only (the default for differenced price data).
    Constant,
    /// Intercept and linear trend.
    ConstantAndTrend,
    /// No deterministic terms.
    None,
}

/// Bracketed p-value relative to the embedded critical-value levels.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum PValueBound {
    LessThan(f64),
    Between(f64, f64),
    GreaterThan(f64),
}

impl core::fmt::Display for PValueBound {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            PValueBound::LessThan(a) => write!(f, "<{a}"),
            PValueBound::Between(lo, hi) => write!(f, "{lo}..{hi}"),
            PValueBound::GreaterThan(a) => write!(f, ">{a}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AdfResult {
    pub statistic: f64,
    pub lag_order: usize,
    pub form: RegressionForm,
    pub p_value: PValueBound,
    /// Critical values at 1%, 5%, 10% for the effective sample size.
    pub critical_values: [f64; 3],
    /// Rows in the test regression.
    pub n_obs: usize,
}

impl AdfResult {
    /// True when the unit-root null is rejected at `alpha` (one of the
    /// embedded levels 0.01, 0.05, 0.10).
    pub fn rejects_at(&self, alpha: f64) -> bool {
        let idx = match alpha {
            a if a == 0.01 => 0,
            a if a == 0.05 => 1,
            a if a == 0.10 => 2,
            _ => return false,
        };
        self.statistic < self.critical_values[idx]
    }
}

// Response-surface constants for the t-ratio distribution: value at level =
// b0 + b1/n + b2/n^2 + b3/n^3 with n the regression sample size. Rows are
// the 1%, 5%, 10% levels.
const SURFACE_CONSTANT: [[f64; 4]; 3] = [
    [-3.43035, -6.5393, -16.786, -79.433],
    [-2.86154, -2.8903, -4.234, -40.040],
    [-2.56677, -1.5384, -2.809, 0.0],
];
const SURFACE_TREND: [[f64; 4]; 3] = [
    [-3.95877, -9.0531, -28.428, -134.155],
    [-3.41049, -4.3904, -9.036, -45.374],
    [-3.12705, -2.5856, -3.925, -22.380],
];
const SURFACE_NONE: [[f64; 4]; 3] = [
    [-2.56574, -2.2358, -3.627, 0.0],
    [-1.94100, -0.2686, -3.365, 31.223],
    [-1.61682, 0.2656, -2.714, 17.296],
];

/// Critical values at 1%, 5%, 10% for a regression with `n_obs` rows.
pub fn critical_values(form: RegressionForm, n_obs: usize) -> [f64; 3] {
    let table = match form {
        RegressionForm::Constant => &SURFACE_CONSTANT,
        RegressionForm::ConstantAndTrend => &SURFACE_TREND,
        RegressionForm::None => &SURFACE_NONE,
    };
    let n = n_obs as f64;
    let mut out = [0.0; 3];
    for (i, b) in table.iter().enumerate() {
        out[i] = b[0] + b[1] / n + b[2] / (n * n) + b[3] / (n * n * n);
    }
    out
}

/// Run the ADF test on one series.
pub fn adf_test(series: &[f64], lag_order: usize, form: RegressionForm) -> Result<AdfResult, Error> {
    let t = series.len();
    if t <= 2 * (lag_order + 2) {
        return Err(Error::LagTooLarge { lag: lag_order, len: t });
    }
    let dy: Vec<f64> = series.windows(2).map(|w| w[1] - w[0]).collect();
    let rows = dy.len() - lag_order;
    let det_cols = match form {
        RegressionForm::Constant => 1,
        RegressionForm::ConstantAndTrend => 2,
        RegressionForm::None => 0,
    };
    let k = det_cols + 1 + lag_order;
    if rows <= k {
        return Err(Error::LagTooLarge { lag: lag_order, len: t });
    }

    let mut x = Mat::zeros(rows, k);
    let mut y = Mat::zeros(rows, 1);
    for r in 0..rows {
        let t_idx = lag_order + r; // index into dy
        let mut c = 0;
        if det_cols >= 1 {
            x[(r, c)] = 1.0;
            c += 1;
        }
        if det_cols == 2 {
            x[(r, c)] = r as f64;
            c += 1;
        }
        x[(r, c)] = series[t_idx]; // y_{t-1}: level preceding dy[t_idx]
        c += 1;
        for i in 1..=lag_order {
            x[(r, c)] = dy[t_idx - i];
            c += 1;
        }
        y[(r, 0)] = dy[t_idx];
    }

    let beta = linalg::lstsq(&x, &y).map_err(|col| Error::CollinearDesign { col })?;
    let fitted = x.matmul(&beta);
    let mut rss = 0.0;
    for r in 0..rows {
        let e = y[(r, 0)] - fitted[(r, 0)];
        rss += e * e;
    }
    let s2 = rss / (rows - k) as f64;
    let xtx = x.transpose().matmul(&x);
    let xtx_inv = linalg::spd_inverse(&xtx).ok_or(Error::CollinearDesign { col: 0 })?;
    let gamma_idx = det_cols;
    let se = num::sqrt(s2 * xtx_inv[(gamma_idx, gamma_idx)]);
    let statistic = beta[(gamma_idx, 0)] / se;

    let crit = critical_values(form, rows);
    let p_value = if statistic < crit[0] {
        PValueBound::LessThan(0.01)
    } else if statistic < crit[1] {
        PValueBound::Between(0.01, 0.05)
    } else if statistic < crit[2] {
        PValueBound::Between(0.05, 0.10)
    } else {
        PValueBound::GreaterThan(0.10)
    };

    Ok(AdfResult {
        statistic,
        lag_order,
        form,
        p_value,
        critical_values: crit,
        n_obs: rows,
    })
}
