//! Quantile regression via an exact linear program, with pairs-bootstrap
//! standard errors.
//!
//! The fit minimizes the check loss `sum rho_tau(y - X b)`. In LP form:
//! minimize `tau 1'u + (1-tau) 1'v` subject to `X b + u - v = y`, `u, v >= 0`
//! with `b` split into positive and negative parts. A primal simplex with an
//! explicit basis inverse solves it exactly; the initial basis is the
//! residual column for each row.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::Error;
use crate::linalg::Mat;
use crate::num;
use crate::regress::{fit_from_se, FitMethod, RegressionDesign, RegressionFit};
use crate::rng::{replicate_seed, rng_from_seed, stage_seed};

/// Check loss `sum rho_tau(y_i - x_i'b)`.
pub fn check_loss(design: &RegressionDesign, beta: &[f64], tau: f64) -> f64 {
    let mut loss = 0.0;
    for i in 0..design.n() {
        let fitted: f64 = design
            .regressors
            .row(i)
            .iter()
            .zip(beta)
            .map(|(x, b)| x * b)
            .sum();
        let r = design.response[i] - fitted;
        loss += if r >= 0.0 { tau * r } else { (tau - 1.0) * r };
    }
    loss
}

const PIVOT_TOL: f64 = 1e-9;
const MAX_ITER: usize = 20_000;

/// Exact check-loss minimizer for `X b ~ y` at quantile `tau`.
pub fn solve_quantile(x: &Mat, y: &[f64], tau: f64) -> Result<Vec<f64>, Error> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::InvalidQuantileLevel(tau));
    }
    let n = x.rows();
    let k = x.cols();
    assert_eq!(n, y.len());
    if n == 0 {
        return Err(Error::EmptyDesign);
    }

    // Variable layout: [b+ (k), b- (k), u (n), v (n)].
    let n_vars = 2 * k + 2 * n;
    let cost = |j: usize| -> f64 {
        if j < 2 * k {
            0.0
        } else if j < 2 * k + n {
            tau
        } else {
            1.0 - tau
        }
    };
    // Column j of the constraint matrix at row i.
    let col_entry = |j: usize, i: usize| -> f64 {
        if j < k {
            x[(i, j)]
        } else if j < 2 * k {
            -x[(i, j - k)]
        } else if j < 2 * k + n {
            if i == j - 2 * k {
                1.0
            } else {
                0.0
            }
        } else if i == j - 2 * k - n {
            -1.0
        } else {
            0.0
        }
    };

    // Start from the residual basis: u_i where y_i >= 0, else v_i.
    let mut basis: Vec<usize> = (0..n)
        .map(|i| if y[i] >= 0.0 { 2 * k + i } else { 2 * k + n + i })
        .collect();
    let mut in_basis = vec![false; n_vars];
    for &j in &basis {
        in_basis[j] = true;
    }
    let mut b_inv = Mat::identity(n);
    for i in 0..n {
        if y[i] < 0.0 {
            b_inv[(i, i)] = -1.0;
        }
    }
    let mut x_b: Vec<f64> = y.iter().map(|v| num::abs(*v)).collect();

    let bland_after = 50 * (n + k);
    for iter in 0..MAX_ITER {
        // Duals: d' = c_B' B^-1.
        let mut duals = vec![0.0; n];
        for (row, &bj) in basis.iter().enumerate() {
            let cb = cost(bj);
            if cb != 0.0 {
                for i in 0..n {
                    duals[i] += cb * b_inv[(row, i)];
                }
            }
        }

        // Entering column: most negative reduced cost (Bland's rule once the
        // iteration budget suggests cycling).
        let mut entering = None;
        let mut best = -PIVOT_TOL;
        for j in 0..n_vars {
            if in_basis[j] {
                continue;
            }
            let mut reduced = cost(j);
            if j < 2 * k {
                // Dense structural column.
                for i in 0..n {
                    reduced -= duals[i] * col_entry(j, i);
                }
            } else if j < 2 * k + n {
                reduced -= duals[j - 2 * k];
            } else {
                reduced += duals[j - 2 * k - n];
            }
            if reduced < best {
                if iter >= bland_after {
                    entering = Some(j);
                    break;
                }
                best = reduced;
                entering = Some(j);
            }
        }
        let Some(entering) = entering else {
            // Optimal: read off b = b+ - b-.
            let mut beta = vec![0.0; k];
            for (row, &bj) in basis.iter().enumerate() {
                if bj < k {
                    beta[bj] += x_b[row];
                } else if bj < 2 * k {
                    beta[bj - k] -= x_b[row];
                }
            }
            return Ok(beta);
        };

        // Direction: B^-1 A_entering.
        let mut direction = vec![0.0; n];
        if entering < 2 * k {
            for row in 0..n {
                let mut s = 0.0;
                for i in 0..n {
                    s += b_inv[(row, i)] * col_entry(entering, i);
                }
                direction[row] = s;
            }
        } else if entering < 2 * k + n {
            let i = entering - 2 * k;
            for row in 0..n {
                direction[row] = b_inv[(row, i)];
            }
        } else {
            let i = entering - 2 * k - n;
            for row in 0..n {
                direction[row] = -b_inv[(row, i)];
            }
        }

        // Ratio test; Bland tie-break on the leaving variable index.
        let mut leaving: Option<(usize, f64)> = None;
        for row in 0..n {
            if direction[row] > PIVOT_TOL {
                let ratio = x_b[row] / direction[row];
                match leaving {
                    None => leaving = Some((row, ratio)),
                    Some((lrow, lratio)) => {
                        if ratio < lratio - 1e-12
                            || (num::abs(ratio - lratio) <= 1e-12 && basis[row] < basis[lrow])
                        {
                            leaving = Some((row, ratio));
                        }
                    }
                }
            }
        }
        let Some((pivot_row, step)) = leaving else {
            return Err(Error::LpDidNotConverge);
        };

        // Pivot update of B^-1 and the basic solution.
        let pivot = direction[pivot_row];
        for i in 0..n {
            b_inv[(pivot_row, i)] /= pivot;
        }
        for row in 0..n {
            if row != pivot_row && num::abs(direction[row]) > 0.0 {
                let f = direction[row];
                for i in 0..n {
                    let delta = f * b_inv[(pivot_row, i)];
                    b_inv[(row, i)] -= delta;
                }
            }
        }
        for row in 0..n {
            if row != pivot_row {
                x_b[row] -= step * direction[row];
                if x_b[row] < 0.0 {
                    x_b[row] = 0.0;
                }
            }
        }
        x_b[pivot_row] = step;
        in_basis[basis[pivot_row]] = false;
        in_basis[entering] = true;
        basis[pivot_row] = entering;
    }
    Err(Error::LpDidNotConverge)
}

/// Quantile fit with pairs-bootstrap standard errors. Replicates draw rows
/// with replacement using seeds derived from `seed`, so results are
/// reproducible bit for bit.
pub fn quantile_fit(
    design: &RegressionDesign,
    tau: f64,
    n_boot: usize,
    seed: u64,
) -> Result<RegressionFit, Error> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::InvalidQuantileLevel(tau));
    }
    if n_boot == 0 {
        return Err(Error::ZeroBootstrap);
    }
    let n = design.n();
    let k = design.k();
    if n <= k {
        return Err(Error::TooFewRows { needed: k + 1, have: n });
    }

    let beta = solve_quantile(&design.regressors, &design.response, tau)?;

    let stage = stage_seed(seed, 0x71_5245_4752); // distinct stream per stage
    let mut replicate_coefs: Vec<Vec<f64>> = Vec::with_capacity(n_boot);
    for b in 0..n_boot {
        let mut rng = rng_from_seed(replicate_seed(stage, b as u64));
        // Redraw on a degenerate resample; the draw sequence stays seeded.
        let mut attempts = 0;
        loop {
            let mut xs = Mat::zeros(n, k);
            let mut ys = vec![0.0; n];
            for row in 0..n {
                let pick = rng.random_range(0..n);
                xs.row_mut(row).copy_from_slice(design.regressors.row(pick));
                ys[row] = design.response[pick];
            }
            match solve_quantile(&xs, &ys, tau) {
                Ok(coefs) => {
                    replicate_coefs.push(coefs);
                    break;
                }
                Err(_) if attempts < 100 => attempts += 1,
                Err(e) => return Err(e),
            }
        }
    }

    let std_errors: Vec<f64> = (0..k)
        .map(|j| {
            let col: Vec<f64> = replicate_coefs.iter().map(|c| c[j]).collect();
            num::std_dev(&col)
        })
        .collect();

    Ok(fit_from_se(
        FitMethod::Quantile { tau, bootstrap: n_boot },
        design,
        beta,
        std_errors,
    ))
}
