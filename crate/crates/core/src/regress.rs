//! Regression layer: design assembly, OLS, and Newey-West HAC covariance.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::conflict::FatalitySeries;
use crate::error::Error;
use crate::linalg::{self, Mat};
use crate::num;

/// Response and regressor matrix (intercept in the first column), aligned by
/// year.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RegressionDesign {
    pub response: Vec<f64>,
    pub regressors: Mat,
    pub labels: Vec<String>,
    pub years: Vec<i32>,
}

impl RegressionDesign {
    pub fn n(&self) -> usize {
        self.response.len()
    }

    pub fn k(&self) -> usize {
        self.regressors.cols()
    }
}

/// Intersect the spillover index, fatality series, and CPI level by year;
/// keep only years with positive fatalities (the regressor is their log);
/// drop excluded year ranges.
pub fn build_design(
    spillover: &[(i32, f64)],
    fatalities: &FatalitySeries,
    cpi: &[(i32, f64)],
    exclusions: &[(i32, i32)],
) -> Result<RegressionDesign, Error> {
    let mut rows: Vec<(i32, f64, f64, f64)> = Vec::new();
    for &(year, index_value) in spillover {
        if exclusions.iter().any(|&(lo, hi)| year >= lo && year <= hi) {
            continue;
        }
        let Some(deaths) = fatalities.get(year) else { continue };
        if deaths <= 0.0 {
            continue;
        }
        let Some(&(_, cpi_value)) = cpi.iter().find(|(y, _)| *y == year) else {
            continue;
        };
        rows.push((year, index_value, num::ln(deaths), cpi_value));
    }
    if rows.is_empty() {
        return Err(Error::EmptyDesign);
    }
    rows.sort_by_key(|r| r.0);

    let n = rows.len();
    let mut regressors = Mat::zeros(n, 3);
    let mut response = Vec::with_capacity(n);
    let mut years = Vec::with_capacity(n);
    for (i, &(year, index_value, log_deaths, cpi_value)) in rows.iter().enumerate() {
        regressors[(i, 0)] = 1.0;
        regressors[(i, 1)] = log_deaths;
        regressors[(i, 2)] = cpi_value;
        response.push(index_value);
        years.push(year);
    }
    Ok(RegressionDesign {
        response,
        regressors,
        labels: alloc::vec![
            "(Intercept)".to_string(),
            "log(Fatalities)".to_string(),
            "CPI".to_string(),
        ],
        years,
    })
}

/// OLS solution with the residuals kept for the HAC step.
#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    pub residuals: Vec<f64>,
    pub fitted: Vec<f64>,
}

pub fn ols_fit(design: &RegressionDesign) -> Result<OlsFit, Error> {
    let n = design.n();
    let k = design.k();
    if n <= k {
        return Err(Error::TooFewRows { needed: k + 1, have: n });
    }
    let y = Mat::from_vec(n, 1, design.response.clone());
    let beta = linalg::lstsq(&design.regressors, &y)
        .map_err(|col| Error::CollinearDesign { col })?;
    let fitted_mat = design.regressors.matmul(&beta);
    let fitted: Vec<f64> = (0..n).map(|i| fitted_mat[(i, 0)]).collect();
    let residuals: Vec<f64> = design
        .response
        .iter()
        .zip(&fitted)
        .map(|(y, f)| y - f)
        .collect();
    Ok(OlsFit {
        coefficients: (0..k).map(|j| beta[(j, 0)]).collect(),
        residuals,
        fitted,
    })
}

/// Classical homoskedastic coefficient covariance `s^2 (X'X)^-1`.
pub fn classical_cov(design: &RegressionDesign, fit: &OlsFit) -> Result<Mat, Error> {
    let n = design.n();
    let k = design.k();
    let rss: f64 = fit.residuals.iter().map(|u| u * u).sum();
    let s2 = rss / (n - k) as f64;
    let xtx = design.regressors.transpose().matmul(&design.regressors);
    let inv = linalg::spd_inverse(&xtx).ok_or(Error::CollinearDesign { col: 0 })?;
    Ok(inv.scale(s2))
}

/// Bartlett-kernel rule of thumb: `floor(4 (n/100)^{2/9})`.
pub fn default_nw_lag(n: usize) -> usize {
    num::floor(4.0 * num::powf(n as f64 / 100.0, 2.0 / 9.0)) as usize
}

/// Newey-West HAC coefficient covariance with Bartlett weights
/// `w_l = 1 - l/(L+1)`. At `L = 0` this is exactly the HC0 sandwich.
pub fn newey_west_cov(
    design: &RegressionDesign,
    fit: &OlsFit,
    lag: usize,
) -> Result<Mat, Error> {
    let n = design.n();
    let k = design.k();
    if lag >= n {
        return Err(Error::HacLagTooLarge { lag, n });
    }
    let x = &design.regressors;
    let u = &fit.residuals;

    // Meat: Gamma_0 + sum_l w_l (Gamma_l + Gamma_l').
    let mut meat = Mat::zeros(k, k);
    for t in 0..n {
        let w = u[t] * u[t];
        for a in 0..k {
            for b in 0..k {
                meat[(a, b)] += w * x[(t, a)] * x[(t, b)];
            }
        }
    }
    for l in 1..=lag {
        let w = 1.0 - l as f64 / (lag as f64 + 1.0);
        for t in l..n {
            let s = u[t] * u[t - l];
            for a in 0..k {
                for b in 0..k {
                    let g = s * x[(t, a)] * x[(t - l, b)];
                    meat[(a, b)] += w * g;
                    meat[(b, a)] += w * g;
                }
            }
        }
    }

    let xtx = design.regressors.transpose().matmul(&design.regressors);
    let bread = linalg::spd_inverse(&xtx).ok_or(Error::CollinearDesign { col: 0 })?;
    Ok(bread.matmul(&meat).matmul(&bread))
}

/// How a fit was produced, for reporting.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum FitMethod {
    OlsNeweyWest { lag: usize },
    Quantile { tau: f64, bootstrap: usize },
}

impl core::fmt::Display for FitMethod {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            FitMethod::OlsNeweyWest { lag } => write!(f, "OLS + Newey-West(L={lag})"),
            FitMethod::Quantile { tau, bootstrap } => {
                write!(f, "Quantile(tau={tau}, B={bootstrap})")
            }
        }
    }
}

/// Coefficients with standard errors and significance markers.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RegressionFit {
    pub method: FitMethod,
    pub labels: Vec<String>,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub t_stats: Vec<f64>,
    pub p_values: Vec<f64>,
    pub n: usize,
}

/// Stars at the 0.05 / 0.01 / 0.001 thresholds.
pub fn significance_stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

impl RegressionFit {
    pub fn stars(&self, idx: usize) -> &'static str {
        significance_stars(self.p_values[idx])
    }
}

pub(crate) fn fit_from_cov(
    method: FitMethod,
    design: &RegressionDesign,
    coefficients: Vec<f64>,
    cov: &Mat,
) -> RegressionFit {
    let se: Vec<f64> = (0..design.k()).map(|j| num::sqrt(cov[(j, j)])).collect();
    fit_from_se(method, design, coefficients, se)
}

pub(crate) fn fit_from_se(
    method: FitMethod,
    design: &RegressionDesign,
    coefficients: Vec<f64>,
    std_errors: Vec<f64>,
) -> RegressionFit {
    let df = (design.n() - design.k()) as f64;
    let t_stats: Vec<f64> = coefficients
        .iter()
        .zip(&std_errors)
        .map(|(c, s)| if *s > 0.0 { c / s } else { f64::INFINITY })
        .collect();
    let p_values: Vec<f64> = t_stats
        .iter()
        .map(|&t| num::student_t_two_sided(t, df))
        .collect();
    RegressionFit {
        method,
        labels: design.labels.clone(),
        coefficients,
        std_errors,
        t_stats,
        p_values,
        n: design.n(),
    }
}

/// OLS point estimates with Newey-West standard errors. `lag = None` applies
/// the rule of thumb.
pub fn ols_newey_west(
    design: &RegressionDesign,
    lag: Option<usize>,
) -> Result<RegressionFit, Error> {
    let fit = ols_fit(design)?;
    let lag = lag.unwrap_or_else(|| default_nw_lag(design.n()));
    let cov = newey_west_cov(design, &fit, lag)?;
    Ok(fit_from_cov(
        FitMethod::OlsNeweyWest { lag },
        design,
        fit.coefficients,
        &cov,
    ))
}
