//! Reduction of { x | Aeq x = beq, x >= 0 } to a full-dimensional
//! H-polytope over the free variables of the equality system.

use crate::error::{Error, Result};
use crate::geometry::HPolytope;
use crate::linalg::{gauss_jordan, Matrix};

/// Affine lift x = offset + linear y from reduced coordinates back to the
/// original variable space.
#[derive(Debug, Clone)]
pub struct AffineMap {
    offset: Vec<f64>,
    linear: Matrix,
}

impl AffineMap {
    pub(crate) fn new(offset: Vec<f64>, linear: Matrix) -> Self {
        debug_assert_eq!(offset.len(), linear.rows());
        AffineMap { offset, linear }
    }

    pub(crate) fn offset(&self) -> &[f64] {
        &self.offset
    }

    pub(crate) fn linear(&self) -> &Matrix {
        &self.linear
    }

    pub fn domain_dim(&self) -> usize {
        self.linear.cols()
    }

    pub fn range_dim(&self) -> usize {
        self.linear.rows()
    }

    pub fn lift(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.domain_dim() {
            return Err(Error::DimensionMismatch { expected: self.domain_dim(), got: y.len() });
        }
        let mut x = self.linear.matvec(y);
        for (xi, o) in x.iter_mut().zip(&self.offset) {
            *xi += o;
        }
        Ok(x)
    }
}

/// Gauss-Jordan elimination picks one pivot (basic) variable per
/// independent equality; the remaining free variables parameterize the
/// solution set. Nonnegativity of every original variable becomes the
/// inequality description of the reduced polytope:
/// basic x_c = b_r - sum A_rj y_j >= 0 and free y_j >= 0.
pub fn reduce_to_full_dimension(aeq: &Matrix, beq: &[f64]) -> Result<(HPolytope, AffineMap)> {
    if beq.len() != aeq.rows() {
        return Err(Error::DimensionMismatch { expected: aeq.rows(), got: beq.len() });
    }
    let d = aeq.cols();
    let mut a = aeq.clone();
    let mut b = beq.to_vec();
    let rank_tol = 1e-10 * a.max_abs().max(1.0);
    let rref = gauss_jordan(&mut a, &mut b, rank_tol)?;
    let free = rref.free_columns;
    if free.is_empty() {
        return Err(Error::ZeroDimensional);
    }
    let f = free.len();

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    let mut offset = vec![0.0; d];
    let mut linear = Matrix::zeros(d, f);

    for &(r, c) in &rref.pivots {
        offset[c] = b[r];
        let mut row = vec![0.0; f];
        for (j, &fc) in free.iter().enumerate() {
            let coef = a.get(r, fc);
            row[j] = coef;
            linear.set(c, j, -coef);
        }
        if row.iter().all(|&v| v == 0.0) {
            // The pivot variable is pinned to a constant; it constrains
            // nothing in the reduced space but must itself be nonnegative.
            if b[r] < -1e-9 {
                return Err(Error::EmptyPolytope);
            }
            continue;
        }
        rows.push(row);
        rhs.push(b[r]);
    }
    for (j, &fc) in free.iter().enumerate() {
        linear.set(fc, j, 1.0);
        let mut row = vec![0.0; f];
        row[j] = -1.0;
        rows.push(row);
        rhs.push(0.0);
    }

    let poly = HPolytope::from_rows(&rows, rhs)?;
    Ok((poly, AffineMap { offset, linear }))
}
