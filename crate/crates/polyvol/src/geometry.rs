//! Core geometric types: H-polytopes, balls, ellipsoids.

use crate::error::{Error, Result};
use crate::linalg::{dot, norm_sq, Matrix};
use crate::rng::RngStream;

/// A point is a coordinate vector of the ambient dimension.
pub type Point = Vec<f64>;

/// Convex polytope in halfspace form: { x | A x <= b }.
///
/// The transpose of A is kept alongside so column walks (coordinate
/// directions) touch contiguous memory.
#[derive(Debug, Clone)]
pub struct HPolytope {
    a: Matrix,
    a_t: Matrix,
    b: Vec<f64>,
}

/// Slack below this is treated as outside; see `HPolytope::contains`.
pub const CONTAINS_TOL: f64 = 1e-9;

impl HPolytope {
    pub fn new(a: Matrix, b: Vec<f64>) -> Result<Self> {
        if a.cols() == 0 {
            return Err(Error::ZeroDimensional);
        }
        if a.rows() != b.len() {
            return Err(Error::DimensionMismatch { expected: a.rows(), got: b.len() });
        }
        for i in 0..a.rows() {
            if a.row(i).iter().all(|&v| v == 0.0) {
                return Err(Error::ZeroRow { row: i });
            }
        }
        let a_t = a.transpose();
        Ok(HPolytope { a, a_t, b })
    }

    pub fn from_rows(rows: &[Vec<f64>], b: Vec<f64>) -> Result<Self> {
        HPolytope::new(Matrix::from_rows(rows)?, b)
    }

    /// Ambient dimension d.
    pub fn dim(&self) -> usize {
        self.a.cols()
    }

    /// Number of facet inequalities m.
    pub fn num_rows(&self) -> usize {
        self.a.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.a
    }

    pub fn rhs(&self) -> &[f64] {
        &self.b
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.a.row(i)
    }

    /// Column k of A, contiguous.
    pub fn column(&self, k: usize) -> &[f64] {
        self.a_t.row(k)
    }

    fn check_dim(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: p.len() });
        }
        Ok(())
    }

    /// Slack vector b - A p. Zero entries mean p sits on that facet.
    pub fn slack(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(p)?;
        Ok((0..self.num_rows()).map(|i| self.b[i] - dot(self.a.row(i), p)).collect())
    }

    /// Membership with a small negative slack tolerance so that boundary
    /// points survive a round trip through floating point.
    pub fn contains(&self, p: &[f64]) -> Result<bool> {
        self.check_dim(p)?;
        for i in 0..self.num_rows() {
            if self.b[i] - dot(self.a.row(i), p) < -CONTAINS_TOL {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Polytope in coordinates shifted so `center` becomes the origin.
    pub fn translate(&self, center: &[f64]) -> Result<HPolytope> {
        self.check_dim(center)?;
        let b = (0..self.num_rows())
            .map(|i| self.b[i] - dot(self.a.row(i), center))
            .collect();
        HPolytope::new(self.a.clone(), b)
    }

    /// True when every direction is bounded, decided by 2d support LPs.
    /// An infeasible system is reported as `empty polytope`.
    pub fn check_bounded(&self) -> Result<bool> {
        Ok(self.coordinate_bounds()?.is_some())
    }

    /// Per-coordinate (min, max) bounds from the 2d support LPs, or None
    /// if some direction is unbounded.
    pub(crate) fn coordinate_bounds(&self) -> Result<Option<(Vec<f64>, Vec<f64>)>> {
        let d = self.dim();
        let mut lo = vec![0.0; d];
        let mut hi = vec![0.0; d];
        for k in 0..d {
            let mut c = vec![0.0; d];
            c[k] = 1.0;
            match crate::lp::support_value(self, &c)? {
                Some(v) => hi[k] = v,
                None => return Ok(None),
            }
            c[k] = -1.0;
            match crate::lp::support_value(self, &c)? {
                Some(v) => lo[k] = -v,
                None => return Ok(None),
            }
        }
        Ok(Some((lo, hi)))
    }
}

/// Euclidean ball with positive radius.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::ZeroDimensional);
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Numerical(format!("ball radius must be positive, got {radius}")));
        }
        Ok(Ball { center, radius })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        debug_assert_eq!(p.len(), self.dim());
        let mut s = 0.0;
        for (x, c) in p.iter().zip(&self.center) {
            let t = x - c;
            s += t * t;
        }
        s <= self.radius * self.radius
    }

    pub fn volume(&self) -> f64 {
        ball_volume(self.dim(), self.radius).expect("ball invariants hold")
    }
}

/// ln Gamma(half / 2) computed exactly from the recurrence; the argument is
/// always an integer or half-integer here, so no series approximation is
/// needed and nothing overflows for dimensions in the hundreds.
fn ln_gamma_of_half(half: u64) -> f64 {
    debug_assert!(half >= 1);
    if half % 2 == 0 {
        // ln Gamma(n) = ln (n-1)!
        let n = half / 2;
        (1..n).map(|k| (k as f64).ln()).sum()
    } else {
        // ln Gamma(m + 1/2) = ln sqrt(pi) + sum ln(j - 1/2), j = 1..m
        let m = half / 2;
        let mut s = 0.5 * std::f64::consts::PI.ln();
        for j in 1..=m {
            s += (j as f64 - 0.5).ln();
        }
        s
    }
}

/// ln of the volume of the d-ball of radius r.
pub fn ball_log_volume(d: usize, r: f64) -> Result<f64> {
    if d == 0 {
        return Err(Error::ZeroDimensional);
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Numerical(format!("ball radius must be positive, got {r}")));
    }
    let df = d as f64;
    // ln Gamma(d/2 + 1) has half-argument d + 2.
    Ok(df / 2.0 * std::f64::consts::PI.ln() + df * r.ln() - ln_gamma_of_half(d as u64 + 2))
}

/// Volume of the d-ball of radius r: pi^(d/2) r^d / Gamma(d/2 + 1).
pub fn ball_volume(d: usize, r: f64) -> Result<f64> {
    Ok(ball_log_volume(d, r)?.exp())
}

/// Uniform point in a ball: scale a uniformly random direction by
/// r * u^(1/d), the radial inverse CDF.
pub fn random_point_in_ball(ball: &Ball, rng: &mut RngStream) -> Point {
    let d = ball.dim();
    let mut v = vec![0.0; d];
    loop {
        for x in v.iter_mut() {
            *x = rng.standard_normal();
        }
        let n = norm_sq(&v).sqrt();
        if n > 1e-100 {
            let scale = ball.radius * rng.uniform().powf(1.0 / d as f64) / n;
            for (x, c) in v.iter_mut().zip(&ball.center) {
                *x = *x * scale + c;
            }
            return v;
        }
    }
}

/// Ellipsoid { x | (x - c)^T E (x - c) <= 1 } with E symmetric positive
/// definite.
#[derive(Debug, Clone)]
pub struct Ellipsoid {
    matrix: Matrix,
    center: Point,
}

impl Ellipsoid {
    pub fn new(matrix: Matrix, center: Point) -> Result<Self> {
        if matrix.rows() != matrix.cols() || matrix.rows() != center.len() {
            return Err(Error::DimensionMismatch { expected: center.len(), got: matrix.rows() });
        }
        let scale = matrix.max_abs().max(1e-300);
        for i in 0..matrix.rows() {
            for j in (i + 1)..matrix.cols() {
                if (matrix.get(i, j) - matrix.get(j, i)).abs() > 1e-10 * scale {
                    return Err(Error::Numerical("ellipsoid matrix is not symmetric".into()));
                }
            }
        }
        // Positive definiteness is part of the type's contract.
        matrix.cholesky()?;
        Ok(Ellipsoid { matrix, center })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn quadratic_form(&self, p: &[f64]) -> f64 {
        debug_assert_eq!(p.len(), self.dim());
        let diff: Vec<f64> = p.iter().zip(&self.center).map(|(x, c)| x - c).collect();
        dot(&diff, &self.matrix.matvec(&diff))
    }

    /// Semi-axis lengths 1/sqrt(eigenvalue), sorted ascending.
    pub fn axes(&self) -> Result<Vec<f64>> {
        let mut ev = self.matrix.symmetric_eigenvalues()?;
        ev.sort_by(f64::total_cmp);
        if ev[0] <= 0.0 {
            return Err(Error::NotPositiveDefinite);
        }
        let mut axes: Vec<f64> = ev.iter().map(|l| 1.0 / l.sqrt()).collect();
        axes.sort_by(f64::total_cmp);
        Ok(axes)
    }

    /// Longest over shortest semi-axis.
    pub fn axes_ratio(&self) -> Result<f64> {
        let axes = self.axes()?;
        Ok(axes[axes.len() - 1] / axes[0])
    }
}
