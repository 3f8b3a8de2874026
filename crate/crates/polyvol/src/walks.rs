//! Hit-and-run samplers over a polytope, a ball, or their intersection.
//!
//! One step picks a line through the current point (a random direction for
//! RDHR, a random coordinate axis for CDHR), intersects it with the body,
//! and jumps to a uniform point on the resulting chord. CDHR rides the
//! amortized slack cache from the oracles module; RDHR pays the full facet
//! scan every step.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Ball, HPolytope, Point};
use crate::oracles::{
    apply_cdhr_move, ball_chord, ball_chord_cached, cdhr_query, chord_cdhr_init, chord_facets,
    chord_membership, clip_with_ball, Chord, MembershipBody, WalkState,
};
use crate::rng::RngStream;

/// Chords narrower than this are treated as a point; the walker stays put.
const DEGENERATE_CHORD: f64 = 1e-12;

/// Bisection accuracy used when stepping against a membership oracle.
const MEMBERSHIP_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WalkVariant {
    /// Coordinate-direction hit-and-run.
    Cdhr,
    /// Random-direction hit-and-run.
    Rdhr,
}

/// How chords against the polytope are computed: direct facet arithmetic,
/// or bisection that only asks "is this point inside".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleKind {
    Facet,
    Membership,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkParams {
    pub variant: WalkVariant,
    pub w: usize,
}

impl WalkParams {
    pub fn new(variant: WalkVariant, w: usize) -> Result<Self> {
        if w == 0 {
            return Err(Error::Numerical("walk length must be at least 1".into()));
        }
        Ok(WalkParams { variant, w })
    }
}

/// Steps per generated point: floor(10 + d/10).
pub fn default_walk_length(d: usize) -> usize {
    10 + d / 10
}

/// Uniform direction on the unit sphere via normalized standard normals.
pub(crate) fn random_unit_vector(d: usize, rng: &mut RngStream) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.standard_normal()).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-12 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

fn sample_on_chord(chord: &Chord, rng: &mut RngStream) -> Option<f64> {
    let u = rng.uniform();
    let width = chord.width();
    if width < DEGENERATE_CHORD {
        return None;
    }
    Some(chord.lambda_minus + u * width)
}

fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// One random-direction step inside P (optionally clipped by a ball).
pub fn rdhr_step(
    p: &HPolytope,
    ball: Option<&Ball>,
    point: &[f64],
    rng: &mut RngStream,
) -> Result<Point> {
    let v = random_unit_vector(p.dim(), rng);
    let mut chord = chord_facets(p, point, &v)?;
    if let Some(b) = ball {
        chord = clip_with_ball(&chord, point, &v, b)?;
    }
    let mut out = point.to_vec();
    if let Some(lambda) = sample_on_chord(&chord, rng) {
        for (x, vi) in out.iter_mut().zip(&v) {
            *x += lambda * vi;
        }
    }
    Ok(out)
}

/// One coordinate-direction step, advancing the amortized walk state. The
/// ball clip costs O(1): the cached squared distance to the ball center
/// only changes in the one coordinate that moved.
pub fn cdhr_step(
    p: &HPolytope,
    ball: Option<&Ball>,
    state: &mut WalkState,
    rng: &mut RngStream,
) -> Result<()> {
    if state.last_coord.is_none() {
        return Err(Error::UninitializedState);
    }
    let k = rng.uniform_int(p.dim());
    if let Some(b) = ball {
        let cached = state.ball_radius == b.radius
            && state.ball_center.as_deref() == Some(b.center.as_slice());
        if !cached {
            state.ball_norm_sq = dist_sq(&state.p, &b.center);
            state.ball_center = Some(b.center.clone());
            state.ball_radius = b.radius;
        }
    }
    let mut chord = cdhr_query(p, &state.slack, k)?;
    if let Some(b) = ball {
        let (lo, hi) =
            ball_chord_cached(2.0 * (state.p[k] - b.center[k]), state.ball_norm_sq, b.radius)?;
        chord = Chord::new(chord.lambda_minus.max(lo), chord.lambda_plus.min(hi));
    }
    if let Some(lambda) = sample_on_chord(&chord, rng) {
        let pk_old = state.p[k];
        apply_cdhr_move(p, state, k, lambda)?;
        if let Some(b) = ball {
            if state.steps_since_refresh == 0 {
                // The move triggered a slack refresh; resync the ball cache too.
                state.ball_norm_sq = dist_sq(&state.p, &b.center);
            } else {
                let diff = pk_old - b.center[k];
                state.ball_norm_sq += lambda * (2.0 * diff + lambda);
            }
        }
    }
    state.last_coord = Some(k);
    Ok(())
}

/// Walk(p, P, W): W hit-and-run steps from p, returning the final point.
pub fn walk(
    p: &HPolytope,
    ball: Option<&Ball>,
    point: &[f64],
    params: &WalkParams,
    rng: &mut RngStream,
) -> Result<Point> {
    match params.variant {
        WalkVariant::Rdhr => {
            let mut q = point.to_vec();
            for _ in 0..params.w {
                q = rdhr_step(p, ball, &q, rng)?;
            }
            Ok(q)
        }
        WalkVariant::Cdhr => {
            let (_, mut state) = chord_cdhr_init(p, point, 0)?;
            for _ in 0..params.w {
                cdhr_step(p, ball, &mut state, rng)?;
            }
            Ok(state.p)
        }
    }
}

/// Persistent walker used by the volume phases: keeps the CDHR slack cache
/// alive across samples, supports swapping the clip ball between phases,
/// and degrades to a pure ball body when no polytope is given.
pub(crate) struct Sampler<'a> {
    poly: Option<&'a HPolytope>,
    variant: WalkVariant,
    oracle: OracleKind,
    walk_len: usize,
    ball: Option<Ball>,
    /// Bisection bound for membership mode when no phase ball is active.
    membership_bound: Option<Ball>,
    point: Vec<f64>,
    slack: Vec<f64>,
    ball_norm_sq: f64,
    steps_since_refresh: usize,
    dim: usize,
    axis: Vec<f64>,
}

impl<'a> Sampler<'a> {
    pub(crate) fn new(
        poly: Option<&'a HPolytope>,
        variant: WalkVariant,
        oracle: OracleKind,
        walk_len: usize,
        start: &[f64],
        membership_bound: Option<Ball>,
    ) -> Result<Self> {
        if walk_len == 0 {
            return Err(Error::Numerical("walk length must be at least 1".into()));
        }
        let dim = match poly {
            Some(p) => p.dim(),
            None => start.len(),
        };
        if start.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: start.len() });
        }
        if dim == 0 {
            return Err(Error::ZeroDimensional);
        }
        let mut s = Sampler {
            poly,
            variant,
            oracle,
            walk_len,
            ball: None,
            membership_bound,
            point: start.to_vec(),
            slack: Vec::new(),
            ball_norm_sq: 0.0,
            steps_since_refresh: 0,
            dim,
            axis: vec![0.0; dim],
        };
        s.refresh_caches()?;
        Ok(s)
    }

    pub(crate) fn point(&self) -> &[f64] {
        &self.point
    }

    fn uses_slack(&self) -> bool {
        self.poly.is_some() && self.variant == WalkVariant::Cdhr && self.oracle == OracleKind::Facet
    }

    fn refresh_caches(&mut self) -> Result<()> {
        if self.uses_slack() {
            let p = self.poly.expect("slack cache requires a polytope");
            self.slack = p.slack(&self.point)?;
            if self.slack.iter().any(|&s| s < -1e-6) {
                return Err(Error::StateDrift);
            }
        }
        if let Some(b) = &self.ball {
            self.ball_norm_sq = dist_sq(&self.point, &b.center);
        }
        self.steps_since_refresh = 0;
        Ok(())
    }

    /// Swap the clip ball (None removes it). O(d).
    pub(crate) fn set_ball(&mut self, ball: Option<Ball>) -> Result<()> {
        if let Some(b) = &ball {
            if b.dim() != self.dim {
                return Err(Error::DimensionMismatch { expected: self.dim, got: b.dim() });
            }
        }
        self.ball = ball;
        if let Some(b) = &self.ball {
            self.ball_norm_sq = dist_sq(&self.point, &b.center);
        }
        Ok(())
    }

    /// Restart the chain from a new point, rebuilding every cache.
    pub(crate) fn reseat(&mut self, start: &[f64]) -> Result<()> {
        if start.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: start.len() });
        }
        self.point.copy_from_slice(start);
        self.refresh_caches()
    }

    fn bisection_ball(&self) -> Result<&Ball> {
        self.ball
            .as_ref()
            .or(self.membership_bound.as_ref())
            .ok_or_else(|| Error::Numerical("membership walking needs a bounding ball".into()))
    }

    fn step_cdhr(&mut self, rng: &mut RngStream) -> Result<()> {
        let k = rng.uniform_int(self.dim);
        let chord = match (self.poly, self.oracle) {
            (Some(p), OracleKind::Facet) => {
                let mut chord = cdhr_query(p, &self.slack, k)?;
                if let Some(b) = &self.ball {
                    let (lo, hi) = ball_chord_cached(
                        2.0 * (self.point[k] - b.center[k]),
                        self.ball_norm_sq,
                        b.radius,
                    )?;
                    chord = Chord::new(chord.lambda_minus.max(lo), chord.lambda_plus.min(hi));
                }
                chord
            }
            (Some(p), OracleKind::Membership) => {
                self.axis.iter_mut().for_each(|x| *x = 0.0);
                self.axis[k] = 1.0;
                let bound = self.bisection_ball()?.clone();
                chord_membership(
                    &MembershipBody::Polytope(p),
                    &self.point,
                    &self.axis,
                    &bound,
                    MEMBERSHIP_EPS,
                )?
            }
            (None, _) => {
                let b = self
                    .ball
                    .as_ref()
                    .ok_or_else(|| Error::Numerical("ball-only walker has no ball".into()))?;
                let (lo, hi) = ball_chord_cached(
                    2.0 * (self.point[k] - b.center[k]),
                    self.ball_norm_sq,
                    b.radius,
                )?;
                Chord::new(lo, hi)
            }
        };
        if let Some(lambda) = sample_on_chord(&chord, rng) {
            let pk_old = self.point[k];
            self.point[k] += lambda;
            if self.uses_slack() {
                let p = self.poly.expect("slack cache requires a polytope");
                let col = p.column(k);
                let mut min_slack = f64::INFINITY;
                for (s, &a) in self.slack.iter_mut().zip(col) {
                    *s -= lambda * a;
                    min_slack = min_slack.min(*s);
                }
                self.steps_since_refresh += 1;
                if self.steps_since_refresh >= 10 * self.dim || min_slack < -1e-6 {
                    return self.refresh_caches();
                }
            } else {
                self.steps_since_refresh += 1;
                if self.steps_since_refresh >= 10 * self.dim {
                    return self.refresh_caches();
                }
            }
            if let Some(b) = &self.ball {
                let diff = pk_old - b.center[k];
                self.ball_norm_sq += lambda * (2.0 * diff + lambda);
            }
        }
        Ok(())
    }

    fn step_rdhr(&mut self, rng: &mut RngStream) -> Result<()> {
        let v = random_unit_vector(self.dim, rng);
        let chord = match (self.poly, self.oracle) {
            (Some(p), OracleKind::Facet) => {
                let mut chord = chord_facets(p, &self.point, &v)?;
                if let Some(b) = &self.ball {
                    chord = clip_with_ball(&chord, &self.point, &v, b)?;
                }
                chord
            }
            (Some(p), OracleKind::Membership) => {
                let bound = self.bisection_ball()?.clone();
                chord_membership(
                    &MembershipBody::Polytope(p),
                    &self.point,
                    &v,
                    &bound,
                    MEMBERSHIP_EPS,
                )?
            }
            (None, _) => {
                let b = self
                    .ball
                    .as_ref()
                    .ok_or_else(|| Error::Numerical("ball-only walker has no ball".into()))?;
                let (lo, hi) = ball_chord(&self.point, &v, b)?;
                Chord::new(lo, hi)
            }
        };
        if let Some(lambda) = sample_on_chord(&chord, rng) {
            for (x, vi) in self.point.iter_mut().zip(&v) {
                *x += lambda * vi;
            }
            if let Some(b) = &self.ball {
                self.ball_norm_sq = dist_sq(&self.point, &b.center);
            }
        }
        Ok(())
    }

    fn step(&mut self, rng: &mut RngStream) -> Result<()> {
        match self.variant {
            WalkVariant::Cdhr => self.step_cdhr(rng),
            WalkVariant::Rdhr => self.step_rdhr(rng),
        }
    }

    /// Advance the chain by the configured walk length; the new point
    /// becomes the start of the next sample (chained sampling).
    pub(crate) fn next_sample(&mut self, rng: &mut RngStream) -> Result<Point> {
        for _ in 0..self.walk_len {
            self.step(rng)?;
        }
        Ok(self.point.clone())
    }
}
