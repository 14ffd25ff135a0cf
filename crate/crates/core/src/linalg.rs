//! Dense row-major matrices and the small set of factorizations the crate
//! needs: Householder least squares, Cholesky, symmetric eigenvalues, and
//! spectral radius. Sized for panels of tens of locations, not thousands.

use alloc::vec;
use alloc::vec::Vec;

use crate::num;

/// Dense row-major `f64` matrix.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Build from row-major data. Panics if the length is not `rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "row-major data length mismatch");
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Mat { rows: r, cols: c, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let lhs = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(lhs) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "matvec shape mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn scale(&self, c: f64) -> Mat {
        let mut out = self.clone();
        for x in &mut out.data {
            *x *= c;
        }
        out
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (x, y) in out.data.iter_mut().zip(&other.data) {
            *x += y;
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        num::sqrt(self.data.iter().map(|x| x * x).sum())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &x| m.max(num::abs(x)))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        if self.rows != self.cols {
            return false;
        }
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                if num::abs(self[(i, j)] - self[(j, i)]) > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Reorder rows and columns of a square matrix by `perm`, where entry
    /// `(i, j)` of the result is `self[(perm[i], perm[j])]`.
    pub fn permute_square(&self, perm: &[usize]) -> Mat {
        assert_eq!(self.rows, self.cols);
        assert_eq!(perm.len(), self.rows);
        let mut out = Mat::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self[(perm[i], perm[j])];
            }
        }
        out
    }
}

impl core::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for Mat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Least-squares solution of `X b = y` for every column of `y`, via
/// Householder QR with a relative-pivot rank check.
///
/// Returns the coefficient matrix (`x.cols x y.cols`) or the index of the
/// first numerically dependent column.
pub fn lstsq(x: &Mat, y: &Mat) -> Result<Mat, usize> {
    assert_eq!(x.rows, y.rows, "lstsq shape mismatch");
    let (n, k) = (x.rows, x.cols);
    assert!(n >= k, "lstsq needs at least as many rows as columns");
    let mut r = x.clone();
    let mut q_t_y = y.clone();
    let mut diag_max = 0.0f64;

    for col in 0..k {
        // Householder reflector for column `col` below the diagonal.
        let mut norm2 = 0.0;
        for i in col..n {
            norm2 += r[(i, col)] * r[(i, col)];
        }
        let norm = num::sqrt(norm2);
        diag_max = diag_max.max(norm);
        if norm <= 1e-13 * diag_max.max(1.0) {
            return Err(col);
        }
        let alpha = if r[(col, col)] >= 0.0 { -norm } else { norm };
        let mut v = vec![0.0; n - col];
        v[0] = r[(col, col)] - alpha;
        for i in (col + 1)..n {
            v[i - col] = r[(i, col)];
        }
        let v_norm2: f64 = v.iter().map(|t| t * t).sum();
        if v_norm2 > 0.0 {
            // Apply I - 2 v v' / (v'v) to the trailing block of R and to Q'y.
            for j in col..k {
                let mut dot = 0.0;
                for i in col..n {
                    dot += v[i - col] * r[(i, j)];
                }
                let f = 2.0 * dot / v_norm2;
                for i in col..n {
                    r[(i, j)] -= f * v[i - col];
                }
            }
            for j in 0..q_t_y.cols {
                let mut dot = 0.0;
                for i in col..n {
                    dot += v[i - col] * q_t_y[(i, j)];
                }
                let f = 2.0 * dot / v_norm2;
                for i in col..n {
                    q_t_y[(i, j)] -= f * v[i - col];
                }
            }
        }
        r[(col, col)] = alpha;
        let rel = num::abs(alpha) / diag_max.max(1.0);
        if rel <= 1e-12 {
            return Err(col);
        }
    }

    // Back-substitution.
    let mut beta = Mat::zeros(k, y.cols);
    for j in 0..y.cols {
        for i in (0..k).rev() {
            let mut s = q_t_y[(i, j)];
            for l in (i + 1)..k {
                s -= r[(i, l)] * beta[(l, j)];
            }
            beta[(i, j)] = s / r[(i, i)];
        }
    }
    Ok(beta)
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix,
/// or `None` where a pivot fails.
pub fn cholesky(a: &Mat) -> Option<Mat> {
    assert_eq!(a.rows, a.cols);
    let n = a.rows;
    let mut l = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return None;
                }
                l[(i, i)] = num::sqrt(s);
            } else {
                l[(i, j)] = s / l[(j, j)];
            }
        }
    }
    Some(l)
}

/// Inverse of a symmetric positive-definite matrix via its Cholesky factor.
pub fn spd_inverse(a: &Mat) -> Option<Mat> {
    let l = cholesky(a)?;
    let n = a.rows;
    // Solve L L' X = I column by column.
    let mut inv = Mat::zeros(n, n);
    for col in 0..n {
        let mut z = vec![0.0; n];
        for i in 0..n {
            let mut s = if i == col { 1.0 } else { 0.0 };
            for k in 0..i {
                s -= l[(i, k)] * z[k];
            }
            z[i] = s / l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for k in (i + 1)..n {
                s -= l[(k, i)] * inv[(k, col)];
            }
            inv[(i, col)] = s / l[(i, i)];
        }
    }
    Some(inv)
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn symmetric_eigenvalues(a: &Mat) -> Vec<f64> {
    assert_eq!(a.rows, a.cols);
    let n = a.rows;
    let mut m = a.clone();
    for _sweep in 0..64 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[(i, j)] * m[(i, j)];
            }
        }
        if off <= 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if num::abs(apq) < 1e-300 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + num::sqrt(1.0 + theta * theta))
                } else {
                    -1.0 / (-theta + num::sqrt(1.0 + theta * theta))
                };
                let c = 1.0 / num::sqrt(1.0 + t * t);
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
    eig
}

/// Spectral radius of a square matrix.
///
/// Uses Gelfand's formula with normalized repeated squaring: after `m`
/// squarings the estimate is `exp(sum log ||B_i|| / 2^i)`, which converges
/// geometrically in `m` and is exact for nilpotent matrices (radius 0).
pub fn spectral_radius(a: &Mat) -> f64 {
    assert_eq!(a.rows, a.cols);
    if a.rows == 0 {
        return 0.0;
    }
    let mut b = a.clone();
    let mut log_radius = 0.0;
    let mut weight = 1.0;
    for _ in 0..60 {
        let norm = b.frobenius_norm();
        if norm == 0.0 {
            return 0.0;
        }
        if !norm.is_finite() {
            return f64::INFINITY;
        }
        log_radius += weight * num::ln(norm);
        weight *= 0.5;
        let scaled = b.scale(1.0 / norm);
        b = scaled.matmul(&scaled);
    }
    num::exp(log_radius)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_identity() {
        let a = Mat::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert_eq!(a.matmul(&Mat::identity(2)), a);
    }

    #[test]
    fn lstsq_exact_fit() {
        // y = 2 + 3x at x = 0..4
        let x = Mat::from_rows(&[
            &[1.0, 0.0],
            &[1.0, 1.0],
            &[1.0, 2.0],
            &[1.0, 3.0],
            &[1.0, 4.0],
        ]);
        let y = Mat::from_vec(5, 1, vec![2.0, 5.0, 8.0, 11.0, 14.0]);
        let b = lstsq(&x, &y).unwrap();
        assert!((b[(0, 0)] - 2.0).abs() < 1e-12);
        assert!((b[(1, 0)] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn lstsq_detects_dependent_column() {
        let x = Mat::from_rows(&[&[1.0, 2.0], &[2.0, 4.0], &[3.0, 6.0]]);
        let y = Mat::from_vec(3, 1, vec![1.0, 2.0, 3.0]);
        assert_eq!(lstsq(&x, &y), Err(1));
    }

    #[test]
    fn lstsq_residuals_orthogonal() {
        // Fixed pseudo-random design; orthogonality of residuals is the
        // defining property of the projection.
        let mut state = 88172645463325252u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let n = 40;
        let mut xd = Vec::new();
        let mut yd = Vec::new();
        for _ in 0..n {
            xd.extend([1.0, next(), next(), next()]);
            yd.push(next());
        }
        let x = Mat::from_vec(n, 4, xd);
        let y = Mat::from_vec(n, 1, yd);
        let b = lstsq(&x, &y).unwrap();
        let fitted = x.matmul(&b);
        let resid: Vec<f64> = (0..n).map(|i| y[(i, 0)] - fitted[(i, 0)]).collect();
        for j in 0..4 {
            let dot: f64 = (0..n).map(|i| x[(i, j)] * resid[i]).sum();
            assert!(dot.abs() / n as f64 <= 1e-10, "column {j} dot {dot}");
        }
    }

    #[test]
    fn cholesky_round_trip() {
        let a = Mat::from_rows(&[&[4.0, 2.0, 0.6], &[2.0, 5.0, 1.0], &[0.6, 1.0, 3.0]]);
        let l = cholesky(&a).unwrap();
        let back = l.matmul(&l.transpose());
        for i in 0..3 {
            for j in 0..3 {
                assert!((back[(i, j)] - a[(i, j)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = Mat::from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]);
        assert!(cholesky(&a).is_none());
    }

    #[test]
    fn spd_inverse_matches_identity() {
        let a = Mat::from_rows(&[&[4.0, 1.0], &[1.0, 3.0]]);
        let inv = spd_inverse(&a).unwrap();
        let prod = a.matmul(&inv);
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((prod[(i, j)] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn jacobi_eigenvalues_known() {
        // Eigenvalues of [[2,1],[1,2]] are 1 and 3.
        let a = Mat::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let e = symmetric_eigenvalues(&a);
        assert!((e[0] - 1.0).abs() < 1e-12);
        assert!((e[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn spectral_radius_cases() {
        assert_eq!(spectral_radius(&Mat::zeros(3, 3)), 0.0);
        let half = Mat::identity(4).scale(0.5);
        assert!((spectral_radius(&half) - 0.5).abs() < 1e-10);
        assert!((spectral_radius(&Mat::identity(5)) - 1.0).abs() < 1e-12);
        // Nilpotent Jordan block has radius 0.
        let nil = Mat::from_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert_eq!(spectral_radius(&nil), 0.0);
        // Non-symmetric with known dominant eigenvalue: [[0.7,0.2],[0.4,0.5]]
        // has eigenvalues 0.6 +- sqrt(0.09) -> 0.9 and 0.3.
        let a = Mat::from_rows(&[&[0.7, 0.2], &[0.4, 0.5]]);
        assert!((spectral_radius(&a) - 0.9).abs() < 1e-9);
        // Complex pair: rotation scaled by 0.8.
        let rot = Mat::from_rows(&[&[0.0, -0.8], &[0.8, 0.0]]);
        assert!((spectral_radius(&rot) - 0.8).abs() < 1e-9);
    }
}
