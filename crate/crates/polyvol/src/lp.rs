//! Dense two-phase simplex and the Chebyshev inscribed-ball program.
//!
//! The solver is a plain tableau implementation sized for desk-scale
//! problems (hundreds of rows). Entering columns follow Dantzig's rule
//! until degeneracy stalls progress, then Bland's rule takes over to
//! guarantee termination.

use crate::error::{Error, Result};
use crate::geometry::{Ball, HPolytope};
use crate::linalg::{dot, norm, Matrix};

/// maximize objective . y subject to constraints y <= rhs, with y_j >= 0
/// wherever nonneg[j] holds and free otherwise.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Matrix,
    pub rhs: Vec<f64>,
    pub nonneg: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpSolution {
    Optimal { objective: f64, point: Vec<f64> },
    Infeasible,
    Unbounded,
}

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-7;

#[derive(Clone, Copy, PartialEq)]
enum ColKind {
    Structural,
    Slack,
    Artificial,
}

struct Tableau {
    // k rows by (cols + 1); last column is the right-hand side.
    t: Matrix,
    obj: Vec<f64>,
    basis: Vec<usize>,
    kind: Vec<ColKind>,
    live_rows: Vec<bool>,
    pivots_used: usize,
    pivot_cap: usize,
}

enum SimplexOutcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn rows(&self) -> usize {
        self.t.rows()
    }

    fn cols(&self) -> usize {
        self.kind.len()
    }

    fn rhs(&self, r: usize) -> f64 {
        self.t.get(r, self.cols())
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let n = self.cols() + 1;
        let piv = self.t.get(r, c);
        for j in 0..n {
            self.t.set(r, j, self.t.get(r, j) / piv);
        }
        for i in 0..self.rows() {
            if i == r {
                continue;
            }
            let f = self.t.get(i, c);
            if f == 0.0 {
                continue;
            }
            for j in 0..n {
                self.t.set(i, j, self.t.get(i, j) - f * self.t.get(r, j));
            }
            self.t.set(i, c, 0.0);
        }
        let f = self.obj[c];
        if f != 0.0 {
            for j in 0..n {
                self.obj[j] -= f * self.t.get(r, j);
            }
            self.obj[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Express the given column costs relative to the current basis. The
    /// final entry of `obj` carries the negated objective value.
    fn price_out(&mut self, costs: &[f64]) {
        let cols = self.cols();
        let n = cols + 1;
        self.obj = vec![0.0; n];
        self.obj[..cols].copy_from_slice(costs);
        for r in 0..self.rows() {
            let cb = costs[self.basis[r]];
            if cb == 0.0 {
                continue;
            }
            for j in 0..n {
                self.obj[j] -= cb * self.t.get(r, j);
            }
        }
    }

    fn objective_value(&self) -> f64 {
        -self.obj[self.cols()]
    }

    /// Run pivots until optimal or unbounded, for maximization: a column
    /// with positive reduced cost improves the objective.
    fn run(&mut self, allow_artificial_entering: bool) -> Result<SimplexOutcome> {
        let mut bland = false;
        let mut stall = 0usize;
        let stall_limit = self.rows() + 10;
        loop {
            let mut entering = None;
            if bland {
                for c in 0..self.cols() {
                    if !allow_artificial_entering && self.kind[c] == ColKind::Artificial {
                        continue;
                    }
                    if self.obj[c] > COST_TOL {
                        entering = Some(c);
                        break;
                    }
                }
            } else {
                let mut best = COST_TOL;
                for c in 0..self.cols() {
                    if !allow_artificial_entering && self.kind[c] == ColKind::Artificial {
                        continue;
                    }
                    if self.obj[c] > best {
                        best = self.obj[c];
                        entering = Some(c);
                    }
                }
            }
            let Some(c) = entering else {
                return Ok(SimplexOutcome::Optimal);
            };
            // Ratio test; ties break toward the smallest basis column so a
            // Bland phase cannot cycle.
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows() {
                if !self.live_rows[r] {
                    continue;
                }
                let a = self.t.get(r, c);
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs(r).max(0.0) / a;
                match leave {
                    None => leave = Some((r, ratio)),
                    Some((br, bratio)) => {
                        if ratio < bratio - 1e-12
                            || (ratio <= bratio + 1e-12 && self.basis[r] < self.basis[br])
                        {
                            leave = Some((r, ratio));
                        }
                    }
                }
            }
            let Some((r, ratio)) = leave else {
                return Ok(SimplexOutcome::Unbounded);
            };
            if ratio <= 1e-12 {
                stall += 1;
                if stall >= stall_limit {
                    bland = true;
                }
            } else {
                stall = 0;
            }
            self.pivots_used += 1;
            if self.pivots_used > self.pivot_cap {
                return Err(Error::PivotLimit);
            }
            self.pivot(r, c);
        }
    }
}

/// Two-phase simplex. Free variables are split into positive and negative
/// parts; rows with negative right-hand side get artificial variables.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution> {
    let k = lp.constraints.rows();
    let n = lp.constraints.cols();
    if lp.objective.len() != n || lp.nonneg.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: lp.objective.len() });
    }
    if lp.rhs.len() != k {
        return Err(Error::DimensionMismatch { expected: k, got: lp.rhs.len() });
    }

    // Column layout: structural (split) columns, then slacks, then
    // artificials for the sign-flipped rows.
    let mut col_plus = vec![0usize; n];
    let mut col_minus = vec![None::<usize>; n];
    let mut next = 0usize;
    for j in 0..n {
        col_plus[j] = next;
        next += 1;
        if !lp.nonneg[j] {
            col_minus[j] = Some(next);
            next += 1;
        }
    }
    let n_struct = next;
    let slack_base = n_struct;
    let art_rows: Vec<usize> = (0..k).filter(|&i| lp.rhs[i] < 0.0).collect();
    let art_base = slack_base + k;
    let n_cols = art_base + art_rows.len();

    let mut t = Matrix::zeros(k, n_cols + 1);
    let mut kind = vec![ColKind::Structural; n_cols];
    for c in 0..k {
        kind[slack_base + c] = ColKind::Slack;
    }
    for c in art_base..n_cols {
        kind[c] = ColKind::Artificial;
    }
    let mut basis = vec![0usize; k];
    let mut next_art = art_base;
    for i in 0..k {
        let sign = if lp.rhs[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            let g = sign * lp.constraints.get(i, j);
            if g == 0.0 {
                continue;
            }
            t.set(i, col_plus[j], g);
            if let Some(cm) = col_minus[j] {
                t.set(i, cm, -g);
            }
        }
        t.set(i, slack_base + i, sign);
        t.set(i, n_cols, sign * lp.rhs[i]);
        if sign < 0.0 {
            t.set(i, next_art, 1.0);
            basis[i] = next_art;
            next_art += 1;
        } else {
            basis[i] = slack_base + i;
        }
    }

    let mut tab = Tableau {
        t,
        obj: vec![0.0; n_cols + 1],
        basis,
        kind,
        live_rows: vec![true; k],
        pivots_used: 0,
        pivot_cap: 50 * (k + n_cols),
    };

    // Phase 1: maximize minus the sum of artificials.
    if !art_rows.is_empty() {
        let mut costs = vec![0.0; n_cols];
        for c in art_base..n_cols {
            costs[c] = -1.0;
        }
        tab.price_out(&costs);
        match tab.run(true)? {
            SimplexOutcome::Unbounded => {
                return Err(Error::Numerical("phase 1 reported unbounded".into()))
            }
            SimplexOutcome::Optimal => {}
        }
        if tab.objective_value() < -FEAS_TOL {
            return Ok(LpSolution::Infeasible);
        }
        // Drive leftover artificials out of the basis; rows that cannot
        // pivot are redundant equalities and go dormant.
        for r in 0..k {
            if tab.kind[tab.basis[r]] != ColKind::Artificial {
                continue;
            }
            let mut pivoted = false;
            for c in 0..art_base {
                if tab.t.get(r, c).abs() > PIVOT_TOL {
                    tab.pivot(r, c);
                    pivoted = true;
                    break;
                }
            }
            if !pivoted {
                tab.live_rows[r] = false;
            }
        }
    }

    // Phase 2: the real objective over the feasible tableau.
    let mut costs = vec![0.0; n_cols];
    for j in 0..n {
        costs[col_plus[j]] = lp.objective[j];
        if let Some(cm) = col_minus[j] {
            costs[cm] = -lp.objective[j];
        }
    }
    tab.price_out(&costs);
    match tab.run(false)? {
        SimplexOutcome::Unbounded => return Ok(LpSolution::Unbounded),
        SimplexOutcome::Optimal => {}
    }

    let mut col_value = vec![0.0; n_cols];
    for r in 0..k {
        if tab.live_rows[r] {
            col_value[tab.basis[r]] = tab.rhs(r);
        }
    }
    let point: Vec<f64> = (0..n)
        .map(|j| col_value[col_plus[j]] - col_minus[j].map_or(0.0, |cm| col_value[cm]))
        .collect();
    Ok(LpSolution::Optimal { objective: tab.objective_value(), point })
}

/// Support value max c . x over the polytope, None when that direction is
/// unbounded, `empty polytope` when the system is infeasible.
pub fn support_value(p: &HPolytope, c: &[f64]) -> Result<Option<f64>> {
    if c.len() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), got: c.len() });
    }
    // Row normalization keeps the tableau well scaled.
    let m = p.num_rows();
    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for i in 0..m {
        let n_i = norm(p.row(i));
        rows.push(p.row(i).iter().map(|v| v / n_i).collect::<Vec<f64>>());
        rhs.push(p.rhs()[i] / n_i);
    }
    let lp = LinearProgram {
        objective: c.to_vec(),
        constraints: Matrix::from_rows(&rows)?,
        rhs,
        nonneg: vec![false; p.dim()],
    };
    match solve(&lp)? {
        LpSolution::Optimal { objective, .. } => Ok(Some(objective)),
        LpSolution::Unbounded => Ok(None),
        LpSolution::Infeasible => Err(Error::EmptyPolytope),
    }
}

/// Largest ball inscribed in the polytope: maximize r subject to
/// A_i x + r |A_i| <= b_i and r >= 0, solved on unit-normalized rows.
pub fn chebyshev_ball(p: &HPolytope) -> Result<Ball> {
    let (m, d) = (p.num_rows(), p.dim());
    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for i in 0..m {
        let n_i = norm(p.row(i));
        let mut row: Vec<f64> = p.row(i).iter().map(|v| v / n_i).collect();
        row.push(1.0);
        rows.push(row);
        rhs.push(p.rhs()[i] / n_i);
    }
    let mut objective = vec![0.0; d + 1];
    objective[d] = 1.0;
    let mut nonneg = vec![false; d + 1];
    nonneg[d] = true;
    let lp = LinearProgram { objective, constraints: Matrix::from_rows(&rows)?, rhs, nonneg };
    let (center, radius) = match solve(&lp)? {
        LpSolution::Infeasible => return Err(Error::EmptyPolytope),
        LpSolution::Unbounded => return Err(Error::Unbounded),
        LpSolution::Optimal { objective, point } => (point[..d].to_vec(), objective),
    };
    if radius <= 1e-12 {
        return Err(Error::NotFullDimensional);
    }
    // The reported ball must actually fit.
    for i in 0..m {
        let n_i = norm(p.row(i));
        if radius * n_i > p.rhs()[i] - dot(p.row(i), &center) + FEAS_TOL * n_i.max(1.0) {
            return Err(Error::Numerical(format!(
                "chebyshev ball violates row {i} beyond tolerance"
            )));
        }
    }
    Ball::new(center, radius)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::test_shapes::{cube, simplex};

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn solve_single_bound() {
        let lp = LinearProgram {
            objective: vec![1.0],
            constraints: Matrix::from_rows(&[vec![1.0]]).unwrap(),
            rhs: vec![3.0],
            nonneg: vec![false],
        };
        match solve(&lp).unwrap() {
            LpSolution::Optimal { objective, point } => {
                assert_close(objective, 3.0, 1e-9);
                assert_close(point[0], 3.0, 1e-9);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn solve_detects_unbounded() {
        // maximize y with only y >= 0.
        let lp = LinearProgram {
            objective: vec![1.0],
            constraints: Matrix::from_rows(&[vec![-1.0]]).unwrap(),
            rhs: vec![0.0],
            nonneg: vec![false],
        };
        assert_eq!(solve(&lp).unwrap(), LpSolution::Unbounded);
    }

    #[test]
    fn solve_detects_infeasible() {
        // y >= 0 (variable bound) against y <= -1.
        let lp = LinearProgram {
            objective: vec![1.0],
            constraints: Matrix::from_rows(&[vec![1.0]]).unwrap(),
            rhs: vec![-1.0],
            nonneg: vec![true],
        };
        assert_eq!(solve(&lp).unwrap(), LpSolution::Infeasible);
    }

    #[test]
    fn solve_two_variables() {
        let lp = LinearProgram {
            objective: vec![1.0, 1.0],
            constraints: Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap(),
            rhs: vec![1.0, 1.0],
            nonneg: vec![false, false],
        };
        match solve(&lp).unwrap() {
            LpSolution::Optimal { objective, point } => {
                assert_close(objective, 2.0, 1e-9);
                assert_close(point[0], 1.0, 1e-9);
                assert_close(point[1], 1.0, 1e-9);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn solve_negative_rhs_uses_phase_one() {
        // x >= 2 encoded as -x <= -2, together with x <= 5.
        let lp = LinearProgram {
            objective: vec![1.0],
            constraints: Matrix::from_rows(&[vec![-1.0], vec![1.0]]).unwrap(),
            rhs: vec![-2.0, 5.0],
            nonneg: vec![false],
        };
        match solve(&lp).unwrap() {
            LpSolution::Optimal { objective, point } => {
                assert_close(objective, 5.0, 1e-9);
                assert_close(point[0], 5.0, 1e-9);
            }
            other => panic!("unexpected {other:?}"),
        }
        // Minimizing x instead lands on the artificial-constrained row.
        let lp2 = LinearProgram { objective: vec![-1.0], ..lp };
        match solve(&lp2).unwrap() {
            LpSolution::Optimal { objective, point } => {
                assert_close(objective, -2.0, 1e-9);
                assert_close(point[0], 2.0, 1e-9);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn support_values_on_cube() {
        let c3 = cube(3);
        assert_close(support_value(&c3, &[1.0, 0.0, 0.0]).unwrap().unwrap(), 1.0, 1e-9);
        assert_close(support_value(&c3, &[1.0, 1.0, 1.0]).unwrap().unwrap(), 3.0, 1e-9);
        assert!(c3.check_bounded().unwrap());
    }

    #[test]
    fn unbounded_slab_reports_none() {
        // |x1| <= 1 with x2 unconstrained.
        let slab =
            HPolytope::from_rows(&[vec![1.0, 0.0], vec![-1.0, 0.0]], vec![1.0, 1.0]).unwrap();
        assert_eq!(support_value(&slab, &[0.0, 1.0]).unwrap(), None);
        assert!(!slab.check_bounded().unwrap());
        // A single halfspace is unbounded too.
        let half = HPolytope::from_rows(&[vec![1.0]], vec![0.0]).unwrap();
        assert!(!half.check_bounded().unwrap());
    }

    #[test]
    fn empty_polytope_detected() {
        let empty =
            HPolytope::from_rows(&[vec![1.0], vec![-1.0]], vec![-1.0, 0.0]).unwrap();
        assert_eq!(support_value(&empty, &[1.0]).unwrap_err(), Error::EmptyPolytope);
        assert_eq!(chebyshev_ball(&empty).unwrap_err(), Error::EmptyPolytope);
    }

    #[test]
    fn chebyshev_cube() {
        for d in [1usize, 2, 3, 7] {
            let ball = chebyshev_ball(&cube(d)).unwrap();
            assert_close(ball.radius, 1.0, 1e-9);
            for c in &ball.center {
                assert_close(*c, 0.0, 1e-9);
            }
        }
    }

    #[test]
    fn chebyshev_simplex_analytic() {
        // Inradius of { x >= 0, sum x <= 1 } is 1/(d + sqrt d), attained at
        // the incenter (r, ..., r).
        for d in 2..=6 {
            let ball = chebyshev_ball(&simplex(d)).unwrap();
            let r = 1.0 / (d as f64 + (d as f64).sqrt());
            assert_close(ball.radius, r, 1e-9);
            for c in &ball.center {
                assert_close(*c, r, 1e-8);
            }
        }
    }

    #[test]
    fn chebyshev_simplex_two_matches_grid_search() {
        // Independent check: maximize the minimum normalized slack over a
        // fine grid of candidate centers.
        let p = simplex(2);
        let norms: Vec<f64> = (0..3).map(|i| norm(p.row(i))).collect();
        let mut best = f64::NEG_INFINITY;
        let steps = 400;
        for i in 1..steps {
            for j in 1..steps {
                let x = i as f64 / steps as f64;
                let y = j as f64 / steps as f64;
                if x + y >= 1.0 {
                    continue;
                }
                let s = p.slack(&[x, y]).unwrap();
                let min_slack = (0..3).map(|r| s[r] / norms[r]).fold(f64::INFINITY, f64::min);
                best = best.max(min_slack);
            }
        }
        let ball = chebyshev_ball(&p).unwrap();
        assert_close(ball.radius, (2.0 - 2.0_f64.sqrt()) / 2.0, 1e-9);
        assert!((ball.radius - best).abs() < 2e-3, "grid {best} vs lp {}", ball.radius);
    }

    #[test]
    fn chebyshev_cross_polytope() {
        // Rows (s1, s2) . x <= 1 over all signs; inradius 1/sqrt 2.
        let rows = vec![
            vec![1.0, 1.0],
            vec![1.0, -1.0],
            vec![-1.0, 1.0],
            vec![-1.0, -1.0],
        ];
        let p = HPolytope::from_rows(&rows, vec![1.0; 4]).unwrap();
        let ball = chebyshev_ball(&p).unwrap();
        assert_close(ball.radius, 1.0 / 2.0_f64.sqrt(), 1e-9);
        assert_close(ball.center[0], 0.0, 1e-9);
        assert_close(ball.center[1], 0.0, 1e-9);
    }

    #[test]
    fn chebyshev_scales_with_polytope() {
        for s in [0.1, 1.0, 7.3] {
            let p = simplex(3);
            let scaled = HPolytope::new(
                p.matrix().clone(),
                p.rhs().iter().map(|b| b * s).collect(),
            )
            .unwrap();
            let b0 = chebyshev_ball(&p).unwrap();
            let bs = chebyshev_ball(&scaled).unwrap();
            assert_close(bs.radius / b0.radius, s, 1e-7 * s);
            for (c0, cs) in b0.center.iter().zip(&bs.center) {
                assert_close(*cs, c0 * s, 1e-7 * s.max(1.0));
            }
        }
    }

    #[test]
    fn chebyshev_flat_polytope_rejected() {
        // x1 = 0 slab of zero width: 0 <= x1 <= 0, |x2| <= 1.
        let p = HPolytope::from_rows(
            &[vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]],
            vec![0.0, 0.0, 1.0, 1.0],
        )
        .unwrap();
        assert_eq!(chebyshev_ball(&p).unwrap_err(), Error::NotFullDimensional);
    }
}
