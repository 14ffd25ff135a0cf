//! Scatter summaries: Pearson correlation with its t-test p-value plus a
//! fitted curve, linear or restricted cubic spline.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::linalg::{self, Mat};
use crate::num;

/// Shape of the fitted curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum CurveMode {
    Linear,
    /// Natural (restricted) cubic spline with `knots` knots placed at
    /// quantiles spread evenly over [0.05, 0.95].
    RestrictedCubicSpline { knots: usize },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FittedCurve {
    pub mode: CurveMode,
    /// Knot positions (empty for the linear mode).
    pub knots: Vec<f64>,
    /// Coefficients on [1, x, spline basis...].
    pub coefficients: Vec<f64>,
}

impl FittedCurve {
    /// Evaluate the fitted curve at `x`.
    pub fn predict(&self, x: f64) -> f64 {
        let basis = curve_basis(x, &self.knots);
        basis.iter().zip(&self.coefficients).map(|(b, c)| b * c).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScatterFit {
    pub r: f64,
    pub p_value: f64,
    pub n: usize,
    pub curve: FittedCurve,
}

fn pos_cubed(v: f64) -> f64 {
    if v > 0.0 {
        v * v * v
    } else {
        0.0
    }
}

/// Basis row [1, x, rcs terms...] for the given knots (Harrell's restricted
/// cubic construction; linear beyond the boundary knots).
fn curve_basis(x: f64, knots: &[f64]) -> Vec<f64> {
    let mut row = vec![1.0, x];
    let k = knots.len();
    if k >= 3 {
        let t_last = knots[k - 1];
        let t_prev = knots[k - 2];
        let denom = t_last - t_prev;
        for j in 0..(k - 2) {
            let tj = knots[j];
            let term = pos_cubed(x - tj)
                - pos_cubed(x - t_prev) * (t_last - tj) / denom
                + pos_cubed(x - t_last) * (t_prev - tj) / denom;
            row.push(term);
        }
    }
    row
}

/// Pearson correlation with a two-sided t-test p-value, plus the fitted
/// curve requested.
pub fn scatter_fit_summary(x: &[f64], y: &[f64], mode: CurveMode) -> Result<ScatterFit, Error> {
    assert_eq!(x.len(), y.len(), "x and y must be paired");
    let n = x.len();
    let min_points = match mode {
        CurveMode::Linear => 3,
        CurveMode::RestrictedCubicSpline { knots } => knots + 2,
    };
    if n < min_points {
        return Err(Error::TooFewPoints { needed: min_points, have: n });
    }

    let mx = num::mean(x);
    let my = num::mean(y);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for i in 0..n {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Err(Error::ZeroVariance(alloc::string::String::from("scatter input")));
    }
    let r = sxy / num::sqrt(sxx * syy);
    let df = (n - 2) as f64;
    let p_value = if r.abs() >= 1.0 {
        0.0
    } else {
        let t = r * num::sqrt(df / (1.0 - r * r));
        num::student_t_two_sided(t, df)
    };

    let knots = match mode {
        CurveMode::Linear => Vec::new(),
        CurveMode::RestrictedCubicSpline { knots } => {
            let mut sorted = x.to_vec();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            (0..knots)
                .map(|i| {
                    let q = 0.05 + 0.90 * i as f64 / (knots - 1) as f64;
                    num::quantile_type7(&sorted, q)
                })
                .collect()
        }
    };
    let basis_cols = curve_basis(x[0], &knots).len();
    let mut design = Mat::zeros(n, basis_cols);
    for i in 0..n {
        design.row_mut(i).copy_from_slice(&curve_basis(x[i], &knots));
    }
    let y_mat = Mat::from_vec(n, 1, y.to_vec());
    let beta = linalg::lstsq(&design, &y_mat).map_err(|col| Error::CollinearDesign { col })?;
    let coefficients = (0..basis_cols).map(|j| beta[(j, 0)]).collect();

    Ok(ScatterFit {
        r,
        p_value,
        n,
        curve: FittedCurve { mode, knots, coefficients },
    })
}
