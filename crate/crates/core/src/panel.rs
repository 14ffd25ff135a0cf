//! Year-indexed price panels and their cleaning transforms.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Warning};
use crate::linalg::Mat;
use crate::num;

/// A transform applied to a panel, recorded oldest first.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Transform {
    Raw,
    /// Winsorized per location at fraction `p` (clips below the p-quantile
    /// and above the (1-p)-quantile).
    Winsorized { fraction: f64 },
    FirstDifferenced,
}

impl core::fmt::Display for Transform {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Transform::Raw => write!(f, "raw"),
            Transform::Winsorized { fraction } => write!(f, "winsorized({fraction})"),
            Transform::FirstDifferenced => write!(f, "first-differenced"),
        }
    }
}

/// T x N panel of price levels: one row per calendar year, one column per
/// location. Years are contiguous and ascending; all values finite.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PricePanel {
    years: Vec<i32>,
    locations: Vec<String>,
    values: Mat,
    lineage: Vec<Transform>,
}

impl PricePanel {
    /// Validates shape, year contiguity, and finiteness.
    pub fn new(years: Vec<i32>, locations: Vec<String>, values: Mat) -> Result<Self, Error> {
        if years.is_empty() || locations.is_empty() {
            return Err(Error::EmptyPanel);
        }
        if values.rows() != years.len() || values.cols() != locations.len() {
            return Err(Error::ShapeMismatch {
                years: years.len(),
                locations: locations.len(),
                values: values.rows() * values.cols(),
            });
        }
        for w in years.windows(2) {
            if w[1] != w[0] + 1 {
                return Err(Error::NonContiguousYears { prev: w[0], next: w[1] });
            }
        }
        for (i, &year) in years.iter().enumerate() {
            for (j, loc) in locations.iter().enumerate() {
                if !values[(i, j)].is_finite() {
                    return Err(Error::NonFiniteValue { year, location: loc.clone() });
                }
            }
        }
        Ok(PricePanel { years, locations, values, lineage: alloc::vec![Transform::Raw] })
    }

    pub fn years(&self) -> &[i32] {
        &self.years
    }

    pub fn locations(&self) -> &[String] {
        &self.locations
    }

    pub fn values(&self) -> &Mat {
        &self.values
    }

    pub fn lineage(&self) -> &[Transform] {
        &self.lineage
    }

    /// Number of rows (years).
    pub fn len(&self) -> usize {
        self.years.len()
    }

    pub fn is_empty(&self) -> bool {
        self.years.is_empty()
    }

    pub fn n_locations(&self) -> usize {
        self.locations.len()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values.col(j)
    }

    pub fn column_by_label(&self, label: &str) -> Option<Vec<f64>> {
        let j = self.locations.iter().position(|l| l == label)?;
        Some(self.column(j))
    }

    /// Panel restricted to rows `[start, end)`.
    pub fn slice_rows(&self, start: usize, end: usize) -> PricePanel {
        assert!(start < end && end <= self.len());
        let mut values = Mat::zeros(end - start, self.n_locations());
        for i in start..end {
            values.row_mut(i - start).copy_from_slice(self.values.row(i));
        }
        PricePanel {
            years: self.years[start..end].to_vec(),
            locations: self.locations.clone(),
            values,
            lineage: self.lineage.clone(),
        }
    }

    /// Panel with columns reordered by `perm` (entry `j` of the result is
    /// column `perm[j]` of `self`).
    pub fn permute_columns(&self, perm: &[usize]) -> PricePanel {
        assert_eq!(perm.len(), self.n_locations());
        let mut values = Mat::zeros(self.len(), self.n_locations());
        for i in 0..self.len() {
            for (j, &p) in perm.iter().enumerate() {
                values[(i, j)] = self.values[(i, p)];
            }
        }
        PricePanel {
            years: self.years.clone(),
            locations: perm.iter().map(|&p| self.locations[p].clone()).collect(),
            values,
            lineage: self.lineage.clone(),
        }
    }

    /// Clip each column at its `p` and `1-p` quantiles (type-7 estimator).
    ///
    /// Idempotent and monotone. Re-winsorizing at the same fraction is a
    /// no-op (recorded in the lineage): interpolated cut points recomputed
    /// from already-clipped data would creep inward, so idempotence is
    /// enforced on the transform itself. Columns shorter than `ceil(1/p)`
    /// are still processed but reported as warnings.
    pub fn winsorize(&self, p: f64) -> Result<(PricePanel, Vec<Warning>), Error> {
        if !(p > 0.0 && p < 0.5) {
            return Err(Error::WinsorizeFraction(p));
        }
        if self.lineage.last() == Some(&Transform::Winsorized { fraction: p }) {
            return Ok((self.clone(), Vec::new()));
        }
        let mut warnings = Vec::new();
        let recommended = libm::ceil(1.0 / p) as usize;
        if self.len() < recommended {
            for loc in &self.locations {
                warnings.push(Warning::ShortColumn {
                    location: loc.clone(),
                    have: self.len(),
                    recommended,
                });
            }
        }
        let mut values = self.values.clone();
        for j in 0..self.n_locations() {
            let mut sorted = self.column(j);
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let lo = num::quantile_type7(&sorted, p);
            let hi = num::quantile_type7(&sorted, 1.0 - p);
            for i in 0..self.len() {
                let v = values[(i, j)];
                values[(i, j)] = v.clamp(lo, hi);
            }
        }
        let mut lineage = self.lineage.clone();
        lineage.push(Transform::Winsorized { fraction: p });
        Ok((
            PricePanel {
                years: self.years.clone(),
                locations: self.locations.clone(),
                values,
                lineage,
            },
            warnings,
        ))
    }

    /// Row-to-row differences; the output is indexed by the later year.
    pub fn first_difference(&self) -> Result<PricePanel, Error> {
        if self.len() < 2 {
            return Err(Error::TooFewRows { needed: 2, have: self.len() });
        }
        let t = self.len() - 1;
        let mut values = Mat::zeros(t, self.n_locations());
        for i in 0..t {
            for j in 0..self.n_locations() {
                values[(i, j)] = self.values[(i + 1, j)] - self.values[(i, j)];
            }
        }
        let mut lineage = self.lineage.clone();
        lineage.push(Transform::FirstDifferenced);
        Ok(PricePanel {
            years: self.years[1..].to_vec(),
            locations: self.locations.clone(),
            values,
            lineage,
        })
    }

    /// N x N Pearson correlation matrix of the columns.
    pub fn correlation_matrix(&self) -> Result<Mat, Error> {
        let n = self.n_locations();
        let t = self.len();
        let means: Vec<f64> = (0..n).map(|j| num::mean(&self.column(j))).collect();
        let mut sds = Vec::with_capacity(n);
        for j in 0..n {
            let col = self.column(j);
            let ss: f64 = col.iter().map(|v| (v - means[j]) * (v - means[j])).sum();
            if ss <= 0.0 {
                return Err(Error::ZeroVariance(self.locations[j].clone()));
            }
            sds.push(num::sqrt(ss));
        }
        let mut corr = Mat::identity(n);
        for a in 0..n {
            for b in (a + 1)..n {
                let mut s = 0.0;
                for i in 0..t {
                    s += (self.values[(i, a)] - means[a]) * (self.values[(i, b)] - means[b]);
                }
                let r = s / (sds[a] * sds[b]);
                corr[(a, b)] = r;
                corr[(b, a)] = r;
            }
        }
        Ok(corr)
    }

    /// Cross-location mean level per year, as (year, mean) pairs.
    pub fn yearly_means(&self) -> Vec<(i32, f64)> {
        self.years
            .iter()
            .enumerate()
            .map(|(i, &y)| (y, num::mean(self.values.row(i))))
            .collect()
    }

    /// Human-readable lineage, e.g. "raw > winsorized(0.01) > first-differenced".
    pub fn lineage_string(&self) -> String {
        let parts: Vec<String> = self.lineage.iter().map(|t| format!("{t}")).collect();
        parts.join(" > ").to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn panel(years: Vec<i32>, cols: Vec<Vec<f64>>) -> PricePanel {
        let n = cols.len();
        let t = cols[0].len();
        let mut values = Mat::zeros(t, n);
        for (j, col) in cols.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                values[(i, j)] = v;
            }
        }
        let locations = (0..n).map(|j| format!("loc{j}")).collect();
        PricePanel::new(years, locations, values).unwrap()
    }

    #[test]
    fn rejects_year_gap() {
        let values = Mat::from_vec(3, 1, vec![1.0, 2.0, 3.0]);
        let err = PricePanel::new(vec![1700, 1702, 1703], vec!["a".to_string()], values);
        assert_eq!(
            err.unwrap_err(),
            Error::NonContiguousYears { prev: 1700, next: 1702 }
        );
    }

    #[test]
    fn rejects_non_finite() {
        let values = Mat::from_vec(2, 1, vec![1.0, f64::NAN]);
        let err = PricePanel::new(vec![1700, 1701], vec!["a".to_string()], values);
        assert!(matches!(err, Err(Error::NonFiniteValue { year: 1701, .. })));
    }

    #[test]
    fn winsorize_constant_column_unchanged() {
        let p = panel(vec![1, 2, 3, 4], vec![vec![5.0, 5.0, 5.0, 5.0]]);
        let (w, _) = p.winsorize(0.1).unwrap();
        assert_eq!(w.values(), p.values());
    }

    #[test]
    fn winsorize_clips_to_type7_quantiles() {
        // Frozen oracle: for 1..=100 at p = 0.01, the type-7 quantiles are
        // 1.99 and 99.01; only the extremes move.
        let col: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        let p = panel((1..=100).collect(), vec![col]);
        let (w, _) = p.winsorize(0.01).unwrap();
        let out = w.column(0);
        assert!((out[0] - 1.99).abs() < 1e-12);
        assert!((out[99] - 99.01).abs() < 1e-12);
        for i in 1..99 {
            assert_eq!(out[i], (i + 1) as f64);
        }
    }

    #[test]
    fn winsorize_rejects_bad_fraction() {
        let p = panel(vec![1, 2], vec![vec![1.0, 2.0]]);
        assert_eq!(p.winsorize(0.6).unwrap_err(), Error::WinsorizeFraction(0.6));
        assert_eq!(p.winsorize(0.0).unwrap_err(), Error::WinsorizeFraction(0.0));
    }

    #[test]
    fn winsorize_is_idempotent() {
        let p = panel(
            (1..=12).collect(),
            vec![vec![9.0, 1.0, 4.0, 7.5, 2.0, 11.0, 3.0, 8.0, 5.0, 6.0, 10.0, 0.5]],
        );
        let (once, _) = p.winsorize(0.1).unwrap();
        let (twice, _) = once.winsorize(0.1).unwrap();
        assert_eq!(once.values(), twice.values());
        // A different fraction still re-clips.
        let (tighter, _) = once.winsorize(0.25).unwrap();
        assert_ne!(tighter.values(), once.values());
    }

    #[test]
    fn winsorize_is_monotone() {
        let col = vec![9.0, 1.0, 4.0, 7.5, 2.0, 11.0, 3.0, 8.0, 5.0, 6.0, 10.0, 0.5];
        let p = panel((1..=12).collect(), vec![col.clone()]);
        let (w, _) = p.winsorize(0.1).unwrap();
        let out = w.column(0);
        for i in 0..col.len() {
            for j in 0..col.len() {
                if col[i] <= col[j] {
                    assert!(out[i] <= out[j]);
                }
            }
        }
    }

    #[test]
    fn winsorize_warns_on_short_columns() {
        let p = panel(vec![1, 2, 3], vec![vec![1.0, 2.0, 3.0]]);
        let (_, warnings) = p.winsorize(0.01).unwrap();
        assert_eq!(warnings.len(), 1);
        assert!(matches!(
            warnings[0],
            Warning::ShortColumn { have: 3, recommended: 100, .. }
        ));
    }

    #[test]
    fn first_difference_arithmetic() {
        let p = panel(vec![1, 2, 3], vec![vec![1.0, 3.0, 6.0], vec![5.0, 5.0, 5.0]]);
        let d = p.first_difference().unwrap();
        assert_eq!(d.years(), &[2, 3]);
        assert_eq!(d.column(0), vec![2.0, 3.0]);
        assert_eq!(d.column(1), vec![0.0, 0.0]);
        assert_eq!(
            d.lineage().last(),
            Some(&Transform::FirstDifferenced)
        );
    }

    #[test]
    fn first_difference_needs_two_rows() {
        let p = panel(vec![1], vec![vec![1.0]]);
        assert_eq!(
            p.first_difference().unwrap_err(),
            Error::TooFewRows { needed: 2, have: 1 }
        );
    }

    #[test]
    fn difference_inverts_cumulative_sum() {
        let increments = vec![0.3, -1.2, 2.4, 0.7, -0.5, 1.1];
        let mut levels = vec![10.0];
        for d in &increments {
            levels.push(levels.last().unwrap() + d);
        }
        let p = panel((0..levels.len() as i32).collect(), vec![levels]);
        let d = p.first_difference().unwrap();
        for (got, want) in d.column(0).iter().zip(&increments) {
            assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0));
        }
    }

    #[test]
    fn correlation_self_and_affine() {
        let x = vec![1.0, 4.0, 2.0, 8.0, 5.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 3.0).collect();
        let p = panel(vec![1, 2, 3, 4, 5], vec![x, y]);
        let c = p.correlation_matrix().unwrap();
        assert!((c[(0, 0)] - 1.0).abs() < 1e-12);
        assert!((c[(0, 1)] - 1.0).abs() < 1e-12);
        assert!((c[(1, 0)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn correlation_matches_hand_computation() {
        // Frozen from the covariance/sd ratio on two fixed 5-point columns:
        // x = [1..5], y = [2,1,4,3,6] -> r = 2.5 / sqrt(2.5 * 3.7).
        let p = panel(
            vec![1, 2, 3, 4, 5],
            vec![vec![1.0, 2.0, 3.0, 4.0, 5.0], vec![2.0, 1.0, 4.0, 3.0, 6.0]],
        );
        let c = p.correlation_matrix().unwrap();
        let expect = 2.5 / num::sqrt(2.5 * 3.7);
        assert!((c[(0, 1)] - expect).abs() < 1e-12);
        assert!((expect - 0.8219949365267863).abs() < 1e-14);
    }

    #[test]
    fn correlation_reports_zero_variance_column() {
        let p = panel(vec![1, 2, 3], vec![vec![1.0, 2.0, 3.0], vec![4.0, 4.0, 4.0]]);
        assert_eq!(
            p.correlation_matrix().unwrap_err(),
            Error::ZeroVariance("loc1".to_string())
        );
    }

    #[test]
    fn correlation_is_positive_semidefinite() {
        // Pseudo-random 8-column panel; min eigenvalue >= -1e-10.
        let mut state = 0x1234_5678_9abc_def0u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let cols: Vec<Vec<f64>> = (0..8)
            .map(|_| (0..40).map(|_| next() * 10.0).collect())
            .collect();
        let p = panel((0..40).collect(), cols);
        let c = p.correlation_matrix().unwrap();
        let eig = crate::linalg::symmetric_eigenvalues(&c);
        assert!(eig[0] >= -1e-10, "min eigenvalue {}", eig[0]);
    }
}
