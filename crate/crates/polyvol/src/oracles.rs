//! Boundary oracles: where does a line through an interior point leave the
//! polytope, a ball, or their intersection.
//!
//! Signed distances are measured along a direction v from a base point p0;
//! a chord [lambda-, lambda+] always brackets 0 because p0 is inside.

use crate::error::{Error, Result};
use crate::geometry::{Ball, HPolytope, CONTAINS_TOL};
use crate::linalg::{dot, norm_sq};

/// Rows with |a_i . v| at or below this are parallel to the direction.
pub const PARALLEL_TOL: f64 = 1e-12;

/// Cached slack drifting below this forces a recompute from scratch.
const DRIFT_TOL: f64 = -1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chord {
    pub lambda_minus: f64,
    pub lambda_plus: f64,
}

impl Chord {
    pub(crate) fn new(mut lambda_minus: f64, mut lambda_plus: f64) -> Self {
        // Rounding at a facet can push an endpoint a hair past zero; the
        // base point is inside, so clamp instead of tripping downstream.
        if lambda_minus > 0.0 {
            debug_assert!(lambda_minus < 1e-9, "chord lost the base point: {lambda_minus}");
            lambda_minus = 0.0;
        }
        if lambda_plus < 0.0 {
            debug_assert!(lambda_plus > -1e-9, "chord lost the base point: {lambda_plus}");
            lambda_plus = 0.0;
        }
        Chord { lambda_minus, lambda_plus }
    }

    pub fn width(&self) -> f64 {
        self.lambda_plus - self.lambda_minus
    }
}

/// Chord of the polytope along v by scanning every facet: the positive end
/// is the tightest bound among rows with a_i . v > 0, the negative end the
/// tightest among rows with a_i . v < 0.
pub fn chord_facets(p: &HPolytope, p0: &[f64], v: &[f64]) -> Result<Chord> {
    if p0.len() != p.dim() || v.len() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), got: p0.len().max(v.len()) });
    }
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for i in 0..p.num_rows() {
        let row = p.row(i);
        let dir = dot(row, v);
        if dir.abs() <= PARALLEL_TOL {
            continue;
        }
        let t = (p.rhs()[i] - dot(row, p0)) / dir;
        if dir > 0.0 {
            hi = hi.min(t);
        } else {
            lo = lo.max(t);
        }
    }
    if !hi.is_finite() || !lo.is_finite() {
        return Err(Error::UnboundedDirection);
    }
    Ok(Chord::new(lo, hi))
}

/// Walk state for the amortized coordinate-direction oracle: the current
/// point, its cached slack b - A p, the coordinate of the last move, and a
/// cached squared distance to the active ball center.
#[derive(Debug, Clone)]
pub struct WalkState {
    pub(crate) p: Vec<f64>,
    pub(crate) slack: Vec<f64>,
    pub(crate) last_coord: Option<usize>,
    pub(crate) ball_norm_sq: f64,
    pub(crate) ball_center: Option<Vec<f64>>,
    pub(crate) ball_radius: f64,
    pub(crate) steps_since_refresh: usize,
}

impl WalkState {
    pub fn point(&self) -> &[f64] {
        &self.p
    }

    pub fn cached_slack(&self) -> &[f64] {
        &self.slack
    }

    pub fn last_coord(&self) -> Option<usize> {
        self.last_coord
    }
}

fn check_coord(p: &HPolytope, k: usize) -> Result<()> {
    if k >= p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), got: k });
    }
    Ok(())
}

/// Chord along coordinate k read straight off the cached slack:
/// lambda+ = min slack_i / A_ik over positive column entries, lambda- the
/// mirror image over negative entries.
pub(crate) fn cdhr_query(p: &HPolytope, slack: &[f64], k: usize) -> Result<Chord> {
    let col = p.column(k);
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for (i, &a) in col.iter().enumerate() {
        if a.abs() <= PARALLEL_TOL {
            continue;
        }
        let t = slack[i] / a;
        if a > 0.0 {
            hi = hi.min(t);
        } else {
            lo = lo.max(t);
        }
    }
    if !hi.is_finite() || !lo.is_finite() {
        return Err(Error::UnboundedDirection);
    }
    Ok(Chord::new(lo, hi))
}

/// Apply a move of `delta` along coordinate `coord`: O(m) slack update
/// against one column of A, with a scheduled full recompute every 10 d
/// steps and an unscheduled one whenever the cache drifts visibly negative.
pub(crate) fn apply_cdhr_move(
    p: &HPolytope,
    state: &mut WalkState,
    coord: usize,
    delta: f64,
) -> Result<()> {
    state.p[coord] += delta;
    let col = p.column(coord);
    let mut min_slack = f64::INFINITY;
    for (s, &a) in state.slack.iter_mut().zip(col) {
        *s -= delta * a;
        min_slack = min_slack.min(*s);
    }
    state.steps_since_refresh += 1;
    if state.steps_since_refresh >= 10 * p.dim() || min_slack < DRIFT_TOL {
        state.slack = p.slack(&state.p)?;
        state.steps_since_refresh = 0;
        if state.slack.iter().any(|&s| s < DRIFT_TOL) {
            // A genuine escape from the polytope, not cache rot.
            return Err(Error::StateDrift);
        }
    }
    Ok(())
}

/// Fresh coordinate-direction chord at p0 along e_k, paying the full
/// O(m d) slack computation once.
pub fn chord_cdhr_init(p: &HPolytope, p0: &[f64], k: usize) -> Result<(Chord, WalkState)> {
    check_coord(p, k)?;
    if p0.len() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), got: p0.len() });
    }
    let slack = p.slack(p0)?;
    if slack.iter().any(|&s| s < -CONTAINS_TOL) {
        return Err(Error::Numerical("walk start point lies outside the polytope".into()));
    }
    let mut state = WalkState {
        p: p0.to_vec(),
        slack,
        last_coord: None,
        ball_norm_sq: 0.0,
        ball_center: None,
        ball_radius: 0.0,
        steps_since_refresh: 0,
    };
    let chord = cdhr_query(p, &state.slack, k)?;
    state.last_coord = Some(k);
    Ok((chord, state))
}

/// Amortized step: move by `displacement` along the previous coordinate
/// (O(m) against one column), then answer the chord along the new
/// coordinate k. Must match a fresh init at the moved point to 1e-9.
pub fn chord_cdhr_step(
    p: &HPolytope,
    state: &mut WalkState,
    displacement: f64,
    k: usize,
) -> Result<Chord> {
    check_coord(p, k)?;
    let Some(last) = state.last_coord else {
        return Err(Error::UninitializedState);
    };
    apply_cdhr_move(p, state, last, displacement)?;
    let chord = cdhr_query(p, &state.slack, k)?;
    state.last_coord = Some(k);
    Ok(chord)
}

/// Both roots of lambda^2 + b lambda + c = 0 in the numerically stable
/// form; callers guarantee c <= 0 so the roots straddle zero.
pub(crate) fn quadratic_roots(b: f64, c: f64) -> (f64, f64) {
    let disc = (b * b - 4.0 * c).max(0.0);
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let (r1, r2) = if b == 0.0 {
        let r = disc.sqrt() * 0.5;
        (-r, r)
    } else {
        (q, c / q)
    };
    (r1.min(r2), r1.max(r2))
}

/// Interval of the line p0 + t v inside the ball, for unit v.
pub(crate) fn ball_chord(p0: &[f64], v: &[f64], ball: &Ball) -> Result<(f64, f64)> {
    let mut b = 0.0;
    let mut dist_sq = 0.0;
    for ((x, c), vi) in p0.iter().zip(&ball.center).zip(v) {
        let diff = x - c;
        b += 2.0 * diff * vi;
        dist_sq += diff * diff;
    }
    ball_chord_cached(b, dist_sq, ball.radius)
}

/// Same, from cached quantities: b = 2 <p0 - c, v> and |p0 - c|^2.
pub(crate) fn ball_chord_cached(b: f64, dist_sq: f64, radius: f64) -> Result<(f64, f64)> {
    let mut c = dist_sq - radius * radius;
    if c > 0.0 {
        if c > 1e-9 * radius * radius {
            return Err(Error::Numerical("chord base point lies outside the ball".into()));
        }
        c = 0.0;
    }
    Ok(quadratic_roots(b, c))
}

/// Intersect a polytope chord with a ball. The direction must be unit so
/// the quadratic is monic. Endpoints already strictly inside the ball are
/// returned unchanged.
pub fn clip_with_ball(chord: &Chord, p0: &[f64], v: &[f64], ball: &Ball) -> Result<Chord> {
    if p0.len() != ball.dim() || v.len() != ball.dim() {
        return Err(Error::DimensionMismatch { expected: ball.dim(), got: p0.len().max(v.len()) });
    }
    debug_assert!((norm_sq(v) - 1.0).abs() < 1e-9, "direction must be unit");
    let (lo, hi) = ball_chord(p0, v, ball)?;
    Ok(Chord::new(chord.lambda_minus.max(lo), chord.lambda_plus.min(hi)))
}

/// Convex body given by a membership test, for the bisection oracle.
pub enum MembershipBody<'a> {
    Polytope(&'a HPolytope),
    Opaque(&'a dyn Fn(&[f64]) -> bool),
}

/// Per-row cache for the polytope-backed membership test: each hyperplane
/// contributes one line intersection, computed on first demand so later
/// tests against it cost O(1).
enum RowCache {
    Unseen,
    Parallel,
    Upper(f64),
    Lower(f64),
}

struct LineMembership<'a> {
    body: &'a MembershipBody<'a>,
    p0: &'a [f64],
    v: &'a [f64],
    cache: Vec<RowCache>,
    scratch: Vec<f64>,
}

impl<'a> LineMembership<'a> {
    fn new(body: &'a MembershipBody<'a>, p0: &'a [f64], v: &'a [f64]) -> Self {
        let rows = match body {
            MembershipBody::Polytope(p) => p.num_rows(),
            MembershipBody::Opaque(_) => 0,
        };
        let mut cache = Vec::with_capacity(rows);
        for _ in 0..rows {
            cache.push(RowCache::Unseen);
        }
        LineMembership { body, p0, v, cache, scratch: vec![0.0; p0.len()] }
    }

    fn inside(&mut self, t: f64) -> bool {
        match self.body {
            MembershipBody::Polytope(p) => {
                for i in 0..p.num_rows() {
                    if let RowCache::Unseen = self.cache[i] {
                        let row = p.row(i);
                        let dir = dot(row, self.v);
                        self.cache[i] = if dir.abs() <= PARALLEL_TOL {
                            RowCache::Parallel
                        } else {
                            let cut = (p.rhs()[i] - dot(row, self.p0)) / dir;
                            if dir > 0.0 {
                                RowCache::Upper(cut)
                            } else {
                                RowCache::Lower(cut)
                            }
                        };
                    }
                    let ok = match self.cache[i] {
                        RowCache::Upper(cut) => t <= cut + CONTAINS_TOL,
                        RowCache::Lower(cut) => t >= cut - CONTAINS_TOL,
                        RowCache::Parallel | RowCache::Unseen => true,
                    };
                    if !ok {
                        return false;
                    }
                }
                true
            }
            MembershipBody::Opaque(f) => {
                for (s, (x, vi)) in self.scratch.iter_mut().zip(self.p0.iter().zip(self.v)) {
                    *s = x + t * vi;
                }
                f(&self.scratch)
            }
        }
    }
}

/// Chord of an opaque convex body by bisection: walk out to the bounding
/// ball, then halve until each endpoint is pinned within eps_s. Both
/// returned endpoints are on the inside of the body.
pub fn chord_membership(
    body: &MembershipBody,
    p0: &[f64],
    v: &[f64],
    bounding: &Ball,
    eps_s: f64,
) -> Result<Chord> {
    if !(eps_s > 0.0) {
        return Err(Error::Numerical(format!("bisection accuracy must be positive: {eps_s}")));
    }
    let (ball_lo, ball_hi) = ball_chord(p0, v, bounding)?;
    let mut line = LineMembership::new(body, p0, v);
    if !line.inside(0.0) {
        return Err(Error::Numerical("chord base point lies outside the body".into()));
    }
    let mut bisect = |mut lo: f64, mut hi: f64| {
        // Invariant: lo is inside, hi is outside or on the bounding sphere.
        if line.inside(hi) {
            return hi;
        }
        while hi - lo > eps_s {
            let mid = 0.5 * (lo + hi);
            if line.inside(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    let hi = bisect(0.0, ball_hi);
    let lo = -{
        let mut rev = |mut lo: f64, mut hi: f64| {
            if line.inside(-hi) {
                return hi;
            }
            while hi - lo > eps_s {
                let mid = 0.5 * (lo + hi);
                if line.inside(-mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        };
        rev(0.0, -ball_lo)
    };
    Ok(Chord::new(lo, hi))
}
