//! Small dense row-major matrices and the handful of factorizations the
//! estimator needs. Problem sizes stay in the hundreds, so everything here
//! is written for clarity over asymptotics.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::ZeroDimensional);
        }
        let cols = rows[0].len();
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch { expected: cols, got: r.len() });
            }
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data: rows.iter().flat_map(|r| r.iter().copied()).collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        debug_assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Lower-triangular L with L L^T = self. Requires symmetric positive
    /// definite input; a nonpositive pivot aborts the factorization.
    pub fn cholesky(&self) -> Result<Matrix> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch { expected: self.rows, got: self.cols });
        }
        let n = self.rows;
        let mut l = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let mut sum = self.get(i, j);
                for k in 0..j {
                    sum -= l.get(i, k) * l.get(j, k);
                }
                if i == j {
                    if sum <= 0.0 || !sum.is_finite() {
                        return Err(Error::NotPositiveDefinite);
                    }
                    l.set(i, i, sum.sqrt());
                } else {
                    l.set(i, j, sum / l.get(j, j));
                }
            }
        }
        Ok(l)
    }

    /// Inverse of a symmetric positive definite matrix via Cholesky solves.
    pub fn spd_inverse(&self) -> Result<Matrix> {
        let l = self.cholesky()?;
        let n = self.rows;
        let mut inv = Matrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            let y = forward_substitute(&l, &e);
            let x = back_substitute_lower_transpose(&l, &y);
            for i in 0..n {
                inv.set(i, j, x[i]);
            }
        }
        Ok(inv)
    }

    /// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
    pub fn symmetric_eigenvalues(&self) -> Result<Vec<f64>> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch { expected: self.rows, got: self.cols });
        }
        let n = self.rows;
        let mut a = self.clone();
        let scale = a.max_abs().max(1e-300);
        for _sweep in 0..100 {
            let mut off = 0.0_f64;
            for i in 0..n {
                for j in (i + 1)..n {
                    off = off.max(a.get(i, j).abs());
                }
            }
            if off <= 1e-13 * scale {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a.get(p, q);
                    if apq.abs() <= 1e-300 {
                        continue;
                    }
                    let theta = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a.get(k, p);
                        let akq = a.get(k, q);
                        a.set(k, p, c * akp - s * akq);
                        a.set(k, q, s * akp + c * akq);
                    }
                    for k in 0..n {
                        let apk = a.get(p, k);
                        let aqk = a.get(q, k);
                        a.set(p, k, c * apk - s * aqk);
                        a.set(q, k, s * apk + c * aqk);
                    }
                }
            }
        }
        Ok((0..n).map(|i| a.get(i, i)).collect())
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

/// Solve L y = rhs for lower-triangular L.
pub fn forward_substitute(l: &Matrix, rhs: &[f64]) -> Vec<f64> {
    let n = l.rows();
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut sum = rhs[i];
        for k in 0..i {
            sum -= l.get(i, k) * y[k];
        }
        y[i] = sum / l.get(i, i);
    }
    y
}

/// Solve L^T x = rhs for lower-triangular L.
pub fn back_substitute_lower_transpose(l: &Matrix, rhs: &[f64]) -> Vec<f64> {
    let n = l.rows();
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = rhs[i];
        for k in (i + 1)..n {
            sum -= l.get(k, i) * x[k];
        }
        x[i] = sum / l.get(i, i);
    }
    x
}

/// Product of the diagonal, i.e. the determinant of a triangular matrix.
pub fn diagonal_product(m: &Matrix) -> f64 {
    (0..m.rows()).map(|i| m.get(i, i)).product()
}

/// Outcome of Gauss-Jordan elimination on an augmented system [A | b].
#[derive(Debug)]
pub struct Rref {
    /// (row, column) of each pivot, in elimination order.
    pub pivots: Vec<(usize, usize)>,
    /// Columns of A that did not receive a pivot.
    pub free_columns: Vec<usize>,
}

/// Reduce the augmented matrix [a | rhs] to reduced row echelon form in
/// place, with partial pivoting. `rank_tol` decides when a candidate pivot
/// counts as zero. Errors when a zero row carries a nonzero right side.
pub fn gauss_jordan(a: &mut Matrix, rhs: &mut [f64], rank_tol: f64) -> Result<Rref> {
    let (m, n) = (a.rows(), a.cols());
    debug_assert_eq!(rhs.len(), m);
    let mut pivots = Vec::new();
    let mut free_columns = Vec::new();
    let mut r = 0;
    for c in 0..n {
        // Partial pivoting: largest magnitude entry in column c at/below row r.
        let mut best = r;
        for i in (r + 1)..m {
            if a.get(i, c).abs() > a.get(best, c).abs() {
                best = i;
            }
        }
        if r >= m || a.get(best, c).abs() <= rank_tol {
            free_columns.push(c);
            continue;
        }
        if best != r {
            for j in 0..n {
                let t = a.get(r, j);
                a.set(r, j, a.get(best, j));
                a.set(best, j, t);
            }
            rhs.swap(r, best);
        }
        let piv = a.get(r, c);
        for j in 0..n {
            a.set(r, j, a.get(r, j) / piv);
        }
        rhs[r] /= piv;
        for i in 0..m {
            if i == r {
                continue;
            }
            let f = a.get(i, c);
            if f == 0.0 {
                continue;
            }
            for j in 0..n {
                a.set(i, j, a.get(i, j) - f * a.get(r, j));
            }
            rhs[i] -= f * rhs[r];
        }
        pivots.push((r, c));
        r += 1;
    }
    // Every row past the last pivot is numerically zero; a nonzero right
    // side there means the equalities contradict each other.
    for i in r..m {
        if rhs[i].abs() > 1e-8 {
            return Err(Error::InconsistentSystem);
        }
    }
    Ok(Rref { pivots, free_columns })
}
