//! Iterative rounding: fit an approximate minimum-volume enclosing
//! ellipsoid to a batch of walk samples, change variables so the ellipsoid
//! becomes a ball, and repeat until the body looks round enough. The
//! accumulated determinant undoes the volume distortion at the end.

use crate::error::{Error, Result};
use crate::geometry::{Ellipsoid, HPolytope, Point};
use crate::linalg::{diagonal_product, dot, forward_substitute, Matrix};
use crate::lp::chebyshev_ball;
use crate::rng::RngStream;
use crate::walks::{OracleKind, Sampler, WalkParams};

/// Ellipsoid-fit iterations before giving up on convergence.
const MVEE_MAX_ITERS: usize = 200_000;

/// Rebuild the inverse scatter matrix from scratch this often to stop
/// rank-one update drift.
const MVEE_REBUILD_EVERY: usize = 1_000;

/// Rounding loop iteration cap; hitting it sets the `capped` flag.
const ROUND_MAX_ITERS: usize = 10;

#[derive(Debug, Clone)]
pub struct RoundingResult {
    pub transformed: HPolytope,
    /// Product of det(L^T) over the applied transforms; divide the
    /// transformed volume by this to recover the original.
    pub det_correction: f64,
    pub iterations: usize,
    /// Axes ratio of the last fitted ellipsoid (before its transform).
    pub final_axes_ratio: f64,
    /// The last sample batch, mapped into the final coordinates.
    pub samples: Vec<Point>,
    /// True when the loop stopped at the iteration cap, not the threshold.
    pub capped: bool,
}

// The diagnostic fields are only inspected by tests.
#[cfg_attr(not(test), allow(dead_code))]
pub(crate) struct MveeDetail {
    pub(crate) ellipsoid: Ellipsoid,
    pub(crate) iterations: usize,
    pub(crate) converged: bool,
    /// Log-determinant of the lifted scatter matrix after each update;
    /// must be non-decreasing (it is the dual objective being ascended).
    pub(crate) dual_trace: Vec<f64>,
}

/// Approximate minimum-volume enclosing ellipsoid of a point set.
///
/// Khachiyan's barycentric coordinate ascent on the lifted points
/// q_i = (x_i, 1): keep weights u on the points, repeatedly shift mass
/// onto the point with the largest lifted Mahalanobis norm g_i. Stops when
/// max g <= (1+eps)(d+1). The inverse scatter matrix and all g_i are
/// maintained by rank-one updates, so one iteration costs O(n d).
pub fn mvee(points: &[Point], eps: f64) -> Result<Ellipsoid> {
    mvee_detailed(points, eps).map(|d| d.ellipsoid)
}

pub(crate) fn mvee_detailed(points: &[Point], eps: f64) -> Result<MveeDetail> {
    if !(eps > 0.0) {
        return Err(Error::Numerical(format!("mvee eps must be positive: {eps}")));
    }
    let n = points.len();
    if n == 0 {
        return Err(Error::FlatSample);
    }
    let d = points[0].len();
    if d == 0 {
        return Err(Error::ZeroDimensional);
    }
    if points.iter().any(|p| p.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: 0 });
    }
    if n < d + 1 {
        return Err(Error::FlatSample);
    }
    let ld = d + 1;
    let lifted: Vec<Vec<f64>> = points
        .iter()
        .map(|p| {
            let mut q = Vec::with_capacity(ld);
            q.extend_from_slice(p);
            q.push(1.0);
            q
        })
        .collect();

    let mut u = vec![1.0 / n as f64; n];
    let build_inverse = |u: &[f64]| -> Result<Matrix> {
        let mut x = Matrix::zeros(ld, ld);
        for (w, q) in u.iter().zip(&lifted) {
            if *w == 0.0 {
                continue;
            }
            for i in 0..ld {
                let wi = w * q[i];
                for j in 0..ld {
                    x.set(i, j, x.get(i, j) + wi * q[j]);
                }
            }
        }
        // A singular scatter matrix means the points do not affinely span.
        x.spd_inverse().map_err(|_| Error::FlatSample)
    };

    let mut x_inv = build_inverse(&u)?;
    let mut g: Vec<f64> = lifted.iter().map(|q| dot(q, &x_inv.matvec(q))).collect();
    let mut log_det = {
        // log det X = -log det X^{-1}; reuse the Cholesky of the inverse.
        let l = x_inv.cholesky()?;
        -2.0 * (0..ld).map(|i| l.get(i, i).ln()).sum::<f64>()
    };
    let mut trace = vec![log_det];
    let target = (1.0 + eps) * ld as f64;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < MVEE_MAX_ITERS {
        let (j, &gmax) = g
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty point set");
        if gmax <= target {
            converged = true;
            break;
        }
        let kappa = (gmax - ld as f64) / (ld as f64 * (gmax - 1.0));
        if kappa <= 0.0 {
            // Floating-point already at the optimum.
            converged = true;
            break;
        }
        iterations += 1;

        if iterations % MVEE_REBUILD_EVERY == 0 {
            for w in u.iter_mut() {
                *w *= 1.0 - kappa;
            }
            u[j] += kappa;
            x_inv = build_inverse(&u)?;
            for (gi, q) in g.iter_mut().zip(&lifted) {
                *gi = dot(q, &x_inv.matvec(q));
            }
            let l = x_inv.cholesky()?;
            log_det = -2.0 * (0..ld).map(|i| l.get(i, i).ln()).sum::<f64>();
            trace.push(log_det);
            continue;
        }

        // Rank-one update: X' = (1-k) X + k q_j q_j^T, inverted by
        // Sherman-Morrison; every g_i follows from s_i = q_i . w.
        let w = x_inv.matvec(&lifted[j]);
        let denom = 1.0 - kappa + kappa * gmax;
        let s: Vec<f64> = lifted.iter().map(|q| dot(q, &w)).collect();
        for (gi, si) in g.iter_mut().zip(&s) {
            *gi = (*gi - kappa / denom * si * si) / (1.0 - kappa);
        }
        let scale = kappa / denom;
        for i in 0..ld {
            for jj in 0..ld {
                let v = (x_inv.get(i, jj) - scale * w[i] * w[jj]) / (1.0 - kappa);
                x_inv.set(i, jj, v);
            }
        }
        for uw in u.iter_mut() {
            *uw *= 1.0 - kappa;
        }
        u[j] += kappa;
        // Matrix determinant lemma keeps the dual objective current.
        log_det += ld as f64 * (1.0 - kappa).ln() + (denom / (1.0 - kappa)).ln();
        trace.push(log_det);
    }
    if !converged {
        log::warn!(
            "ellipsoid fit stopped at {MVEE_MAX_ITERS} iterations; using the best weights so far"
        );
    }

    // Assemble the ellipsoid from the final weights: center and centered
    // scatter, then scale so the farthest point sits exactly on the shell.
    let mut center = vec![0.0; d];
    for (w, p) in u.iter().zip(points) {
        for (c, x) in center.iter_mut().zip(p) {
            *c += w * x;
        }
    }
    let mut scatter = Matrix::zeros(d, d);
    for (w, p) in u.iter().zip(points) {
        for i in 0..d {
            let wi = w * (p[i] - center[i]);
            for j in 0..d {
                scatter.set(i, j, scatter.get(i, j) + wi * (p[j] - center[j]));
            }
        }
    }
    let inv = scatter.spd_inverse().map_err(|_| Error::FlatSample)?;
    let mut gq = 0.0f64;
    for p in points {
        let diff: Vec<f64> = p.iter().zip(&center).map(|(x, c)| x - c).collect();
        gq = gq.max(dot(&diff, &inv.matvec(&diff)));
    }
    if !(gq > 0.0) || !gq.is_finite() {
        return Err(Error::FlatSample);
    }
    let mut e = Matrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            // Symmetrize explicitly; the inverse picks up tiny asymmetry.
            e.set(i, j, 0.5 * (inv.get(i, j) + inv.get(j, i)) / gq);
        }
    }
    Ok(MveeDetail { ellipsoid: Ellipsoid::new(e, center)?, iterations, converged, dual_trace: trace })
}

/// Change variables y = L^T (x - c) with E = L L^T, turning the ellipsoid
/// into the unit ball. Returns the transformed polytope and det(L^T);
/// vol(original) = vol(transformed) / det(L^T).
pub fn apply_rounding(p: &HPolytope, e: &Ellipsoid) -> Result<(HPolytope, f64)> {
    if e.dim() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), got: e.dim() });
    }
    let l = e.matrix().cholesky()?;
    let mut rows = Vec::with_capacity(p.num_rows());
    let mut rhs = Vec::with_capacity(p.num_rows());
    for i in 0..p.num_rows() {
        // Row of A (L^T)^{-1} is the solution of L z = a_i.
        rows.push(forward_substitute(&l, p.row(i)));
        rhs.push(p.rhs()[i] - dot(p.row(i), e.center()));
    }
    let det = diagonal_product(&l);
    Ok((HPolytope::from_rows(&rows, rhs)?, det))
}

/// y = L^T (x - c) applied to a batch of points in place.
fn transform_points(l: &Matrix, center: &[f64], pts: &mut [Point]) {
    let d = center.len();
    let mut scratch = vec![0.0; d];
    for p in pts.iter_mut() {
        for (s, (x, c)) in scratch.iter_mut().zip(p.iter().zip(center)) {
            *s = x - c;
        }
        for j in 0..d {
            // Column j of lower-triangular L has entries in rows j..d.
            let mut acc = 0.0;
            for i in j..d {
                acc += l.get(i, j) * scratch[i];
            }
            p[j] = acc;
        }
    }
}

/// Round a polytope by repeated sample-fit-transform passes until the
/// fitted ellipsoid's axes ratio drops below `t_r` (or the iteration cap).
/// The transform is applied on the passing pass too, so the output is
/// normalized to roughly unit scale. Walks start at the Chebyshev center.
pub fn iterative_round(
    p: &HPolytope,
    t_r: f64,
    n: usize,
    params: &WalkParams,
    rng: &mut RngStream,
) -> Result<RoundingResult> {
    if !(t_r > 1.0) {
        return Err(Error::Numerical(format!("rounding threshold must exceed 1: {t_r}")));
    }
    if n == 0 {
        return Err(Error::Numerical("rounding needs a positive sample count".into()));
    }
    let mut poly = p.clone();
    let mut point = chebyshev_ball(&poly)?.center;
    let mut det_correction = 1.0;
    let mut iterations = 0;
    loop {
        let mut sampler =
            Sampler::new(Some(&poly), params.variant, OracleKind::Facet, params.w, &point, None)?;
        let mut samples = Vec::with_capacity(n);
        for _ in 0..n {
            samples.push(sampler.next_sample(rng)?);
        }
        point = sampler.point().to_vec();
        let fitted = mvee(&samples, 0.01)?;
        let ratio = fitted.axes_ratio()?;
        iterations += 1;

        let l = fitted.matrix().cholesky()?;
        let (next, det) = apply_rounding(&poly, &fitted)?;
        poly = next;
        det_correction *= det;
        transform_points(&l, fitted.center(), &mut samples);
        let mut seat = vec![point];
        transform_points(&l, fitted.center(), &mut seat);
        point = seat.pop().expect("one point in, one point out");

        if ratio < t_r {
            return Ok(RoundingResult {
                transformed: poly,
                det_correction,
                iterations,
                final_axes_ratio: ratio,
                samples,
                capped: false,
            });
        }
        if iterations >= ROUND_MAX_ITERS {
            log::warn!(
                "rounding stopped at the {ROUND_MAX_ITERS}-pass cap with axes ratio {ratio:.3} \
                 (threshold {t_r})"
            );
            return Ok(RoundingResult {
                transformed: poly,
                det_correction,
                iterations,
                final_axes_ratio: ratio,
                samples,
                capped: true,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::test_shapes::cube;
    use crate::walks::WalkVariant;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn mvee_cross_vertices_give_unit_disk() {
        // The four points (+-1, 0), (0, +-1): uniform weights are already
        // optimal, so the fit is exact.
        let pts = vec![
            vec![1.0, 0.0],
            vec![-1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.0, -1.0],
        ];
        let e = mvee(&pts, 0.01).unwrap();
        assert_close(e.center()[0], 0.0, 1e-9);
        assert_close(e.center()[1], 0.0, 1e-9);
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert_close(e.matrix().get(i, j), want, 1e-9);
            }
        }
    }

    #[test]
    fn mvee_square_corners_give_radius_sqrt2_circle() {
        let pts = vec![
            vec![1.0, 1.0],
            vec![1.0, -1.0],
            vec![-1.0, 1.0],
            vec![-1.0, -1.0],
        ];
        let e = mvee(&pts, 0.01).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 0.5 } else { 0.0 };
                assert_close(e.matrix().get(i, j), want, 1e-9);
            }
        }
        // Corners sit exactly on the shell.
        for p in &pts {
            assert_close(e.quadratic_form(p), 1.0, 1e-9);
        }
    }

    #[test]
    fn mvee_translation_equivariance() {
        let mut rng = RngStream::new(12);
        let pts: Vec<Point> =
            (0..40).map(|_| (0..3).map(|_| rng.standard_normal()).collect()).collect();
        let shift = [5.0, -2.0, 0.5];
        let shifted: Vec<Point> = pts
            .iter()
            .map(|p| p.iter().zip(&shift).map(|(x, s)| x + s).collect())
            .collect();
        let a = mvee(&pts, 0.01).unwrap();
        let b = mvee(&shifted, 0.01).unwrap();
        for k in 0..3 {
            assert_close(b.center()[k], a.center()[k] + shift[k], 1e-6);
        }
        for i in 0..3 {
            for j in 0..3 {
                assert_close(b.matrix().get(i, j), a.matrix().get(i, j), 1e-6);
            }
        }
    }

    #[test]
    fn mvee_covers_all_points_tightly() {
        let mut rng = RngStream::new(3);
        let pts: Vec<Point> = (0..60)
            .map(|_| {
                (0..4)
                    .map(|k| rng.standard_normal() * (k + 1) as f64 + 0.3)
                    .collect()
            })
            .collect();
        let e = mvee(&pts, 0.01).unwrap();
        let mut max_form = 0.0f64;
        for p in &pts {
            let f = e.quadratic_form(p);
            assert!(f <= 1.0 + 1e-7, "point outside the fit: form {f}");
            max_form = max_form.max(f);
        }
        // gq normalization puts the farthest point exactly on the shell.
        assert!(max_form >= 1.0 - 1e-9, "fit is loose: max form {max_form}");
    }

    #[test]
    fn mvee_rejects_flat_samples() {
        // Collinear points in the plane.
        let pts: Vec<Point> = (0..10).map(|i| vec![i as f64, 2.0 * i as f64]).collect();
        assert_eq!(mvee(&pts, 0.01).unwrap_err(), Error::FlatSample);
        // Too few points to span.
        let few = vec![vec![0.0, 0.0], vec![1.0, 0.0]];
        assert_eq!(mvee(&few, 0.01).unwrap_err(), Error::FlatSample);
    }

    #[test]
    fn mvee_dual_objective_is_monotone() {
        let mut rng = RngStream::new(21);
        let pts: Vec<Point> = (0..200)
            .map(|_| (0..5).map(|k| rng.standard_normal() * (1.0 + k as f64)).collect())
            .collect();
        let detail = mvee_detailed(&pts, 0.01).unwrap();
        assert!(detail.converged);
        assert!(detail.iterations > 0, "nontrivial input should iterate");
        for w in detail.dual_trace.windows(2) {
            assert!(
                w[1] >= w[0] - 1e-9,
                "dual objective decreased: {} -> {}",
                w[0],
                w[1]
            );
        }
    }

    #[test]
    fn apply_rounding_identity_ellipsoid() {
        let c3 = cube(3);
        let e = Ellipsoid::new(Matrix::identity(3), vec![0.0; 3]).unwrap();
        let (p2, det) = apply_rounding(&c3, &e).unwrap();
        assert_close(det, 1.0, 1e-12);
        for i in 0..c3.num_rows() {
            assert_eq!(p2.row(i), c3.row(i));
            assert_close(p2.rhs()[i], c3.rhs()[i], 1e-12);
        }
    }

    #[test]
    fn apply_rounding_rectangle() {
        // [-2,2] x [-1,1] with E = diag(1/4, 1): L = diag(1/2, 1), so the
        // image is [-1,1]^2 and det(L^T) = 1/2.
        let rect = HPolytope::from_rows(
            &[vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]],
            vec![2.0, 2.0, 1.0, 1.0],
        )
        .unwrap();
        let mut m = Matrix::zeros(2, 2);
        m.set(0, 0, 0.25);
        m.set(1, 1, 1.0);
        let e = Ellipsoid::new(m, vec![0.0, 0.0]).unwrap();
        let (p2, det) = apply_rounding(&rect, &e).unwrap();
        assert_close(det, 0.5, 1e-12);
        // Vertex images of (+-2, +-1) are (+-1, +-1) on the boundary.
        for sx in [-1.0, 1.0] {
            for sy in [-1.0, 1.0] {
                assert!(p2.contains(&[sx, sy]).unwrap());
                assert!(!p2.contains(&[sx * 1.0001, sy * 1.0001]).unwrap());
            }
        }
        // Volume identity: vol(image)/det = 4 / 0.5 = 8 = vol(rect).
        assert_close(4.0 / det, 8.0, 1e-12);
    }

    #[test]
    fn round_already_round_cube() {
        let c5 = cube(5);
        let params = WalkParams::new(WalkVariant::Cdhr, 11).unwrap();
        let mut rng = RngStream::new(2);
        let out = iterative_round(&c5, 2.0, 1000, &params, &mut rng).unwrap();
        assert_eq!(out.iterations, 1);
        assert!(!out.capped);
        assert!(out.final_axes_ratio < 2.0, "ratio {}", out.final_axes_ratio);
        assert!(out.final_axes_ratio >= 1.0);
        assert_eq!(out.samples.len(), 1000);
        for s in &out.samples {
            assert!(out.transformed.contains(s).unwrap());
        }
        // Near-isotropic transform: det_correction should match a pure
        // rescaling to the transformed inradius within a factor of 2.
        let r = chebyshev_ball(&out.transformed).unwrap().radius;
        let pure = r.powi(5);
        let ratio = out.det_correction / pure;
        assert!(
            (0.5..=2.0).contains(&ratio),
            "det {} vs pure rescaling {pure}",
            out.det_correction
        );
    }

    #[test]
    fn round_skinny_box_converges() {
        // Axis-aligned skinny box, aspect 100: one pass fixes it.
        let skinny = HPolytope::from_rows(
            &[vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]],
            vec![100.0, 100.0, 1.0, 1.0],
        )
        .unwrap();
        let params = WalkParams::new(WalkVariant::Cdhr, 10).unwrap();
        let mut rng = RngStream::new(7);
        let out = iterative_round(&skinny, 1.5, 1500, &params, &mut rng).unwrap();
        assert!(!out.capped);
        assert!(out.final_axes_ratio < 1.5);
        // The volume identity is exact per pass: vol(transformed) =
        // det_correction * 400. The transformed body is a parallelogram
        // whose area the shoelace formula gives exactly; row order is
        // preserved so adjacent facet pairs are known.
        let t = &out.transformed;
        let corner = |i: usize, j: usize| -> [f64; 2] {
            let (a, b) = (t.row(i)[0], t.row(i)[1]);
            let (c, d) = (t.row(j)[0], t.row(j)[1]);
            let (e, f) = (t.rhs()[i], t.rhs()[j]);
            let det = a * d - b * c;
            [(d * e - b * f) / det, (a * f - c * e) / det]
        };
        // Rows are +x, -x, +y, -y of the original box; walk the corners
        // in cyclic order (+x,+y), (-x,+y), (-x,-y), (+x,-y).
        let poly_pts = [corner(0, 2), corner(1, 2), corner(1, 3), corner(0, 3)];
        let mut area = 0.0;
        for w in 0..4 {
            let p = poly_pts[w];
            let q = poly_pts[(w + 1) % 4];
            area += p[0] * q[1] - q[0] * p[1];
        }
        let area = 0.5 * area.abs();
        assert_close(area / out.det_correction, 400.0, 400.0 * 1e-6);
        // Fitting the returned (already transformed) samples again can
        // only improve the ratio.
        let refit = mvee(&out.samples, 0.01).unwrap();
        assert!(refit.axes_ratio().unwrap() <= out.final_axes_ratio + 1e-6);
    }

    #[test]
    fn rounding_is_deterministic() {
        let c3 = cube(3);
        let params = WalkParams::new(WalkVariant::Rdhr, 5).unwrap();
        let a = iterative_round(&c3, 1.5, 300, &params, &mut RngStream::new(9)).unwrap();
        let b = iterative_round(&c3, 1.5, 300, &params, &mut RngStream::new(9)).unwrap();
        assert_eq!(a.det_correction, b.det_correction);
        assert_eq!(a.samples, b.samples);
        assert_eq!(a.iterations, b.iterations);
    }

    #[test]
    fn rounding_rejects_bad_threshold() {
        let c2 = cube(2);
        let params = WalkParams::new(WalkVariant::Cdhr, 5).unwrap();
        assert!(iterative_round(&c2, 1.0, 100, &params, &mut RngStream::new(1)).is_err());
        assert!(iterative_round(&c2, 0.5, 100, &params, &mut RngStream::new(1)).is_err());
    }
}
