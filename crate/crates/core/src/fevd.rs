//! Forecast-error variance decomposition.
//!
//! Shares are stored with rows indexing the shock source and columns the
//! target: entry `(i, j)` is the fraction of location `j`'s H-step
//! forecast-error variance attributed to shocks in location `i`.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::Error;
use crate::linalg::{self, Mat};
use crate::var::{ma_coefficients, VarModel};

/// Decomposition method.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum FevdMethod {
    /// Orthogonalized shocks via the lower Cholesky factor of the residual
    /// covariance; shares depend on variable ordering.
    Cholesky,
    /// Generalized (correlated-shock) shares scaled by the shock variable's
    /// residual variance; invariant to variable ordering once normalized.
    Generalized,
    /// Audit variant of the generalized shares with the scale factor and
    /// denominator taken on the target variable's equation instead of the
    /// shock's.
    GeneralizedTargetScaled,
}

impl core::fmt::Display for FevdMethod {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            FevdMethod::Cholesky => write!(f, "cholesky"),
            FevdMethod::Generalized => write!(f, "generalized"),
            FevdMethod::GeneralizedTargetScaled => write!(f, "generalized-target-scaled"),
        }
    }
}

/// H-step share matrix plus provenance.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FevdMatrix {
    pub horizon: usize,
    pub method: FevdMethod,
    /// Row = source, column = target.
    pub shares: Mat,
    /// Whether each target's incoming shares were rescaled to sum to one.
    pub normalized: bool,
    pub locations: Vec<String>,
}

impl FevdMatrix {
    pub fn n(&self) -> usize {
        self.locations.len()
    }

    /// Rescale each target's incoming shares (columns) to sum to one.
    /// Idempotent; errors on a zero-sum target.
    pub fn normalize(&self) -> Result<FevdMatrix, Error> {
        let n = self.n();
        let mut shares = self.shares.clone();
        for j in 0..n {
            let sum: f64 = (0..n).map(|i| shares[(i, j)]).sum();
            if sum <= 0.0 {
                return Err(Error::ZeroTargetSum(self.locations[j].clone()));
            }
            for i in 0..n {
                shares[(i, j)] /= sum;
            }
        }
        Ok(FevdMatrix { shares, normalized: true, ..self.clone() })
    }
}

/// Compute the H-step FEVD of a fitted model.
pub fn fevd(model: &VarModel, horizon: usize, method: FevdMethod) -> Result<FevdMatrix, Error> {
    if horizon == 0 {
        return Err(Error::InvalidHorizon);
    }
    let n = model.locations.len();
    let sigma = &model.sigma;
    for j in 0..n {
        if sigma[(j, j)] <= 0.0 {
            return Err(Error::NotPositiveDefinite);
        }
    }
    let ma = ma_coefficients(model, horizon)?;

    // Per-target H-step forecast-error variance: sum_h (A_h Sigma A_h')_{tt}.
    let mut fe_variance = alloc::vec![0.0; n];
    for a in &ma.mats {
        let a_sigma = a.matmul(sigma);
        for t in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                acc += a_sigma[(t, k)] * a[(t, k)];
            }
            fe_variance[t] += acc;
        }
    }

    let mut shares = Mat::zeros(n, n);
    match method {
        FevdMethod::Cholesky => {
            let chol = linalg::cholesky(sigma).ok_or(Error::NotPositiveDefinite)?;
            for a in &ma.mats {
                let impact = a.matmul(&chol);
                for src in 0..n {
                    for tgt in 0..n {
                        let x = impact[(tgt, src)];
                        shares[(src, tgt)] += x * x;
                    }
                }
            }
            for src in 0..n {
                for tgt in 0..n {
                    shares[(src, tgt)] /= fe_variance[tgt];
                }
            }
        }
        FevdMethod::Generalized | FevdMethod::GeneralizedTargetScaled => {
            for a in &ma.mats {
                let a_sigma = a.matmul(sigma);
                for src in 0..n {
                    for tgt in 0..n {
                        let x = a_sigma[(tgt, src)];
                        shares[(src, tgt)] += x * x;
                    }
                }
            }
            for src in 0..n {
                for tgt in 0..n {
                    let scale = match method {
                        FevdMethod::Generalized => sigma[(src, src)],
                        _ => sigma[(tgt, tgt)],
                    };
                    shares[(src, tgt)] /= scale * fe_variance[tgt];
                }
            }
        }
    }

    Ok(FevdMatrix {
        horizon,
        method,
        shares,
        normalized: false,
        locations: model.locations.clone(),
    })
}
