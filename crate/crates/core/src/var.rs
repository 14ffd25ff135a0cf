//! VAR(p) estimation by equation-wise least squares, lag-order selection,
//! and the moving-average recursion.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::Error;
use crate::linalg::{self, Mat};
use crate::num;
use crate::panel::PricePanel;

/// Estimated VAR(p): `y_t = c + Phi_1 y_{t-1} + ... + Phi_p y_{t-p} + e_t`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VarModel {
    pub lag_order: usize,
    /// Length-N intercept (zeros when fitted without one).
    pub intercept: Vec<f64>,
    /// Coefficient matrices `Phi_1..Phi_p`; entry `(i, j)` is the loading of
    /// equation `i` on lag of variable `j`.
    pub coeffs: Vec<Mat>,
    /// Residual covariance.
    pub sigma: Mat,
    /// Rows used in the regression.
    pub t_eff: usize,
    pub locations: Vec<String>,
}

/// Estimation switches. Defaults: intercept included, degrees-of-freedom
/// adjusted covariance denominator `T_eff - K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FitOptions {
    pub intercept: bool,
    pub dof_adjust: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { intercept: true, dof_adjust: true }
    }
}

/// Information criteria for lag-order selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum InfoCriterion {
    Aic,
    Bic,
    HannanQuinn,
}

impl core::fmt::Display for InfoCriterion {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            InfoCriterion::Aic => write!(f, "AIC"),
            InfoCriterion::Bic => write!(f, "BIC"),
            InfoCriterion::HannanQuinn => write!(f, "HQ"),
        }
    }
}

/// Scores per candidate order and the winner (ties go to the smaller order).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OrderSelection {
    pub criterion: InfoCriterion,
    pub scores: Vec<(usize, f64)>,
    pub chosen: usize,
}

/// Moving-average coefficients `A_0..A_{H-1}` with `A_0 = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaCoefficients {
    pub mats: Vec<Mat>,
}

/// Smallest number of regression rows that keeps the residual covariance
/// full-rank: K regressors plus one residual direction per variable.
pub fn min_rows_for_fit(n_vars: usize, lag_order: usize, intercept: bool) -> usize {
    let k = n_vars * lag_order + usize::from(intercept);
    k + n_vars
}

pub fn fit_var(panel: &PricePanel, lag_order: usize) -> Result<VarModel, Error> {
    fit_var_with(panel, lag_order, FitOptions::default())
}

pub fn fit_var_with(
    panel: &PricePanel,
    lag_order: usize,
    options: FitOptions,
) -> Result<VarModel, Error> {
    if lag_order == 0 {
        return Err(Error::ZeroLagOrder);
    }
    let n = panel.n_locations();
    let t = panel.len();
    if t <= lag_order {
        return Err(Error::TooFewRows { needed: lag_order + 1, have: t });
    }
    let t_eff = t - lag_order;
    let k = n * lag_order + usize::from(options.intercept);
    if t_eff < min_rows_for_fit(n, lag_order, options.intercept) {
        return Err(Error::RankDeficient { rows: t_eff, cols: k, vars: n });
    }

    let values = panel.values();
    let mut x = Mat::zeros(t_eff, k);
    let mut y = Mat::zeros(t_eff, n);
    for r in 0..t_eff {
        let t_idx = lag_order + r;
        let mut c = 0;
        if options.intercept {
            x[(r, 0)] = 1.0;
            c = 1;
        }
        for lag in 1..=lag_order {
            for j in 0..n {
                x[(r, c)] = values[(t_idx - lag, j)];
                c += 1;
            }
        }
        for j in 0..n {
            y[(r, j)] = values[(t_idx, j)];
        }
    }

    let beta = linalg::lstsq(&x, &y)
        .map_err(|_| Error::RankDeficient { rows: t_eff, cols: k, vars: n })?;

    let fitted = x.matmul(&beta);
    let mut resid = Mat::zeros(t_eff, n);
    for r in 0..t_eff {
        for j in 0..n {
            resid[(r, j)] = y[(r, j)] - fitted[(r, j)];
        }
    }
    let denom = if options.dof_adjust { (t_eff - k) as f64 } else { t_eff as f64 };
    let mut sigma = resid.transpose().matmul(&resid);
    sigma = sigma.scale(1.0 / denom);

    let offset = usize::from(options.intercept);
    let intercept: Vec<f64> = if options.intercept {
        (0..n).map(|i| beta[(0, i)]).collect()
    } else {
        alloc::vec![0.0; n]
    };
    let mut coeffs = Vec::with_capacity(lag_order);
    for lag in 0..lag_order {
        let mut phi = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                phi[(i, j)] = beta[(offset + lag * n + j, i)];
            }
        }
        coeffs.push(phi);
    }

    Ok(VarModel {
        lag_order,
        intercept,
        coeffs,
        sigma,
        t_eff,
        locations: panel.locations().to_vec(),
    })
}

/// Fit candidates `1..=p_max` on the sample aligned to `p_max` losses so the
/// criteria are comparable, and pick the minimizer.
pub fn select_order(
    panel: &PricePanel,
    p_max: usize,
    criterion: InfoCriterion,
) -> Result<OrderSelection, Error> {
    if p_max == 0 {
        return Err(Error::ZeroLagOrder);
    }
    let n = panel.n_locations();
    let t = panel.len();
    if t <= p_max {
        return Err(Error::TooFewRows { needed: p_max + 1, have: t });
    }
    let t_common = t - p_max;
    if t_common < min_rows_for_fit(n, p_max, true) {
        return Err(Error::RankDeficient {
            rows: t_common,
            cols: n * p_max + 1,
            vars: n,
        });
    }

    let values = panel.values();
    let mut scores = Vec::with_capacity(p_max);
    for p in 1..=p_max {
        let k = 1 + n * p;
        let mut x = Mat::zeros(t_common, k);
        let mut y = Mat::zeros(t_common, n);
        for r in 0..t_common {
            let t_idx = p_max + r;
            x[(r, 0)] = 1.0;
            for lag in 1..=p {
                for j in 0..n {
                    x[(r, 1 + (lag - 1) * n + j)] = values[(t_idx - lag, j)];
                }
            }
            for j in 0..n {
                y[(r, j)] = values[(t_idx, j)];
            }
        }
        let beta = linalg::lstsq(&x, &y)
            .map_err(|_| Error::RankDeficient { rows: t_common, cols: k, vars: n })?;
        let fitted = x.matmul(&beta);
        let mut cross = Mat::zeros(n, n);
        for r in 0..t_common {
            for a in 0..n {
                let ra = y[(r, a)] - fitted[(r, a)];
                for b in 0..n {
                    let rb = y[(r, b)] - fitted[(r, b)];
                    cross[(a, b)] += ra * rb;
                }
            }
        }
        let sigma_ml = cross.scale(1.0 / t_common as f64);
        let chol = linalg::cholesky(&sigma_ml)
            .ok_or(Error::RankDeficient { rows: t_common, cols: k, vars: n })?;
        let mut ln_det = 0.0;
        for i in 0..n {
            ln_det += 2.0 * num::ln(chol[(i, i)]);
        }
        let n_params = (n * (1 + p * n)) as f64;
        let tf = t_common as f64;
        let penalty = match criterion {
            InfoCriterion::Aic => 2.0 * n_params / tf,
            InfoCriterion::Bic => num::ln(tf) * n_params / tf,
            InfoCriterion::HannanQuinn => 2.0 * num::ln(num::ln(tf)) * n_params / tf,
        };
        scores.push((p, ln_det + penalty));
    }

    let mut chosen = scores[0].0;
    let mut best = scores[0].1;
    for &(p, s) in &scores[1..] {
        if s < best {
            best = s;
            chosen = p;
        }
    }
    Ok(OrderSelection { criterion, scores, chosen })
}

/// Moving-average coefficients out to `horizon` terms:
/// `A_0 = I`, `A_h = Phi_1 A_{h-1} + ... + Phi_p A_{h-p}` (zero below `A_0`).
pub fn ma_coefficients(model: &VarModel, horizon: usize) -> Result<MaCoefficients, Error> {
    if horizon == 0 {
        return Err(Error::InvalidHorizon);
    }
    let n = model.locations.len();
    let mut mats: Vec<Mat> = Vec::with_capacity(horizon);
    mats.push(Mat::identity(n));
    for h in 1..horizon {
        let mut a = Mat::zeros(n, n);
        for (l, phi) in model.coeffs.iter().enumerate() {
            let lag = l + 1;
            if lag > h {
                break;
            }
            a = a.add(&phi.matmul(&mats[h - lag]));
        }
        mats.push(a);
    }
    Ok(MaCoefficients { mats })
}

/// Companion matrix of the VAR: `(N*p) x (N*p)` with the coefficient blocks
/// in the first block row and shifted identities below.
pub fn companion_matrix(model: &VarModel) -> Mat {
    let n = model.locations.len();
    let p = model.lag_order;
    let m = n * p;
    let mut c = Mat::zeros(m, m);
    for (l, phi) in model.coeffs.iter().enumerate() {
        for i in 0..n {
            for j in 0..n {
                c[(i, l * n + j)] = phi[(i, j)];
            }
        }
    }
    for i in n..m {
        c[(i, i - n)] = 1.0;
    }
    c
}

/// Spectral radius of the companion matrix with a stationarity flag.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StabilityCheck {
    pub spectral_radius: f64,
    pub stable: bool,
}

pub fn stability_check(model: &VarModel) -> StabilityCheck {
    let radius = linalg::spectral_radius(&companion_matrix(model));
    StabilityCheck { spectral_radius: radius, stable: radius < 1.0 }
}
