//! Multiphase Monte Carlo volume estimation.
//!
//! The body is sandwiched between co-centric balls B(0, 2^{alpha/d}) and
//! B(0, 2^{beta/d}); consecutive intersections P_i = P n B(0, 2^{i/d})
//! differ in volume by at most a factor of 2, so each ratio
//! vol(P_i)/vol(P_{i-1}) is estimated well by counting how many of N
//! uniform points in P_i land in P_{i-1}. Phases run from beta down to
//! alpha+1 and reuse surviving points, so each phase only generates the
//! partial batch it is missing. The telescoping product against the exact
//! innermost ball volume yields the estimate; everything is accumulated in
//! log space to survive high dimensions.

use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{ball_log_volume, random_point_in_ball, Ball, HPolytope, Point};
use crate::linalg::norm_sq;
use crate::lp::chebyshev_ball;
use crate::rng::RngStream;
use crate::rounding::iterative_round;
use crate::walks::{default_walk_length, OracleKind, Sampler, WalkParams, WalkVariant};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum Rounding {
    Off,
    On {
        /// Axes-ratio threshold the rounding loop drives the body under.
        threshold: f64,
    },
}

#[derive(Debug, Clone)]
pub struct VolumeParams {
    /// Target approximation parameter; drives the per-phase sample count.
    pub epsilon: f64,
    pub variant: WalkVariant,
    /// Steps per sample; defaults to floor(10 + d/10) when None.
    pub walk_len: Option<usize>,
    pub oracle: OracleKind,
    pub rounding: Rounding,
    /// Fixed per-phase sample count, overriding the epsilon formula.
    pub n_override: Option<usize>,
}

impl Default for VolumeParams {
    fn default() -> Self {
        VolumeParams {
            epsilon: 1.0,
            variant: WalkVariant::Cdhr,
            walk_len: None,
            oracle: OracleKind::Facet,
            rounding: Rounding::Off,
            n_override: None,
        }
    }
}

impl VolumeParams {
    fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::Numerical(format!("epsilon must be positive: {}", self.epsilon)));
        }
        if self.walk_len == Some(0) {
            return Err(Error::Numerical("walk length must be at least 1".into()));
        }
        if self.n_override == Some(0) {
            return Err(Error::Numerical("sample count must be at least 1".into()));
        }
        if let Rounding::On { threshold } = self.rounding {
            if !(threshold > 1.0) {
                return Err(Error::Numerical(format!(
                    "rounding threshold must exceed 1: {threshold}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VolumeEstimate {
    pub volume: f64,
    /// Points per phase.
    pub n: usize,
    /// Walk length actually used.
    pub w: usize,
    pub alpha: i64,
    pub beta: i64,
    /// Final point count of each phase, outermost first.
    pub counts: Vec<usize>,
    /// counts / N, the estimated per-phase volume ratios.
    pub ratios: Vec<f64>,
    /// Determinant correction accumulated by rounding (1 when off).
    pub det_correction: f64,
    pub elapsed_seconds: f64,
    pub seed: u64,
    pub stream: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunStatistics {
    pub repetitions: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    /// Sample standard deviation over successful runs (0 for one run).
    pub std_dev: f64,
    /// (exact - mean) / exact, when an exact volume was supplied.
    pub rel_err_mean: Option<f64>,
    /// (max - min) / mean.
    pub spread: f64,
    pub exact: Option<f64>,
    pub runs: Vec<VolumeEstimate>,
    /// Per-repetition error messages for failed runs.
    pub failures: Vec<String>,
}

/// Points per phase: floor(400 eps^-2 d ln d), with the d=1 special case
/// floor(400 eps^-2) where the log factor would vanish.
pub fn sample_count(d: usize, epsilon: f64) -> Result<usize> {
    if d == 0 {
        return Err(Error::ZeroDimensional);
    }
    if !(epsilon > 0.0) {
        return Err(Error::Numerical(format!("epsilon must be positive: {epsilon}")));
    }
    let base = 400.0 / (epsilon * epsilon);
    let raw = if d == 1 { base } else { base * d as f64 * (d as f64).ln() };
    if !raw.is_finite() || raw >= 1e15 {
        return Err(Error::Numerical(format!("sample count overflows: {raw}")));
    }
    let n = raw.floor() as usize;
    if n == 0 {
        return Err(Error::Numerical(format!(
            "epsilon {epsilon} is too large: the sample count formula gives 0"
        )));
    }
    Ok(n)
}

/// Radius 2^{i/d} of the i-th ball in the phase sequence.
fn radius_at(d: usize, i: i64) -> f64 {
    (i as f64 / d as f64).exp2()
}

/// Phase index range and radii: alpha = floor(d log2 r) so the innermost
/// ball fits inside the body, beta = ceil(d log2 rho) so the outermost
/// covers every sample.
pub fn ball_sequence(r: f64, rho: f64, d: usize) -> Result<(i64, i64, Vec<f64>)> {
    if d == 0 {
        return Err(Error::ZeroDimensional);
    }
    if !(r > 0.0) || !r.is_finite() || !rho.is_finite() || rho < r {
        return Err(Error::Numerical(format!("bad sandwich radii: r={r}, rho={rho}")));
    }
    let alpha = (d as f64 * r.log2()).floor() as i64;
    let mut beta = (d as f64 * rho.log2()).ceil() as i64;
    // Floating point can land beta a notch under alpha when rho ~ r.
    beta = beta.max(alpha);
    let radii = (alpha..=beta).map(|i| radius_at(d, i)).collect();
    Ok((alpha, beta, radii))
}

struct PhaseOutcome {
    alpha: i64,
    beta: i64,
    counts: Vec<usize>,
    log_ratio_sum: f64,
}

/// The countdown over phases beta..alpha+1 shared by the polytope and
/// pure-ball estimators. `s` enters holding N points uniform in the
/// outermost intersection; each phase keeps the survivors of the next
/// smaller ball, tops the batch back up to N by walking in the larger
/// intersection (counting only survivors), and multiplies in N/count.
fn run_phases(
    sampler: &mut Sampler,
    mut s: Vec<Point>,
    r: f64,
    d: usize,
    n: usize,
    body_radius: Option<f64>,
    rng: &mut RngStream,
) -> Result<PhaseOutcome> {
    let rho = s
        .iter()
        .map(|q| norm_sq(q))
        .fold(0.0, f64::max)
        .sqrt()
        .max(r);
    let (alpha, beta, _) = ball_sequence(r, rho, d)?;
    let mut counts = Vec::with_capacity((beta - alpha) as usize);
    let mut log_ratio_sum = 0.0;
    for i in ((alpha + 1)..=beta).rev() {
        let r_small = radius_at(d, i - 1);
        let small_sq = r_small * r_small;
        let count_prev = s.len();
        s.retain(|q| norm_sq(q) <= small_sq);
        if s.is_empty() {
            return Err(Error::PhaseStarved { phase: i });
        }
        if count_prev < n {
            // Top the batch back up inside the larger intersection. For a
            // pure ball body the intersection of co-centric balls is the
            // smaller of the two.
            let r_large = radius_at(d, i);
            let clip = body_radius.map_or(r_large, |br| r_large.min(br));
            sampler.set_ball(Some(Ball::new(vec![0.0; d], clip)?))?;
            sampler.reseat(&s[0])?;
            for _ in 0..(n - count_prev) {
                let q = sampler.next_sample(rng)?;
                if norm_sq(&q) <= small_sq {
                    s.push(q);
                }
            }
        }
        let count = s.len();
        if 10 * count < n {
            log::warn!(
                "phase {i}: survival ratio {count}/{n} fell below the 0.1 sanity floor \
                 (consecutive ball volumes only differ by 2x)"
            );
        }
        counts.push(count);
        log_ratio_sum += (n as f64).ln() - (count as f64).ln();
    }
    Ok(PhaseOutcome { alpha, beta, counts, log_ratio_sum })
}

/// Smallest origin-centered ball certain to contain the polytope, from
/// per-coordinate support bounds.
fn bounding_ball(p: &HPolytope) -> Result<Ball> {
    let (lo, hi) = p
        .coordinate_bounds()?
        .ok_or(Error::Unbounded)?;
    let radius_sq: f64 = lo
        .iter()
        .zip(&hi)
        .map(|(l, h)| l.abs().max(h.abs()).powi(2))
        .sum();
    Ball::new(vec![0.0; p.dim()], radius_sq.sqrt().max(1e-12))
}

/// Estimate the volume of a bounded full-dimensional H-polytope.
pub fn estimate_volume(
    p: &HPolytope,
    params: &VolumeParams,
    rng: &mut RngStream,
) -> Result<VolumeEstimate> {
    let t0 = Instant::now();
    params.validate()?;
    if !p.check_bounded()? {
        return Err(Error::Unbounded);
    }
    let d = p.dim();
    let n = match params.n_override {
        Some(n) => n,
        None => sample_count(d, params.epsilon)?,
    };
    let w = params.walk_len.unwrap_or_else(|| default_walk_length(d));
    let walk = WalkParams::new(params.variant, w)?;

    // Center on the Chebyshev ball so all phase balls sit at the origin.
    let cheb = chebyshev_ball(p)?;
    let mut poly = p.translate(&cheb.center)?;
    let mut r = cheb.radius;
    let mut det_correction = 1.0;
    let mut samples = Vec::new();

    if let Rounding::On { threshold } = params.rounding {
        let rounded = iterative_round(&poly, threshold, n, &walk, rng)?;
        det_correction = rounded.det_correction;
        // The transform moved the Chebyshev ball; recenter on the new one
        // and carry the final sample batch into the same coordinates
        // (linear images of uniform samples stay uniform).
        let cheb2 = chebyshev_ball(&rounded.transformed)?;
        poly = rounded.transformed.translate(&cheb2.center)?;
        r = cheb2.radius;
        samples = rounded.samples;
        for q in &mut samples {
            for (x, c) in q.iter_mut().zip(&cheb2.center) {
                *x -= c;
            }
        }
    }

    let membership_bound = if params.oracle == OracleKind::Membership {
        Some(bounding_ball(&poly)?)
    } else {
        None
    };
    let start = match samples.last() {
        Some(q) => q.clone(),
        None => random_point_in_ball(&Ball::new(vec![0.0; d], r)?, rng),
    };
    let mut sampler =
        Sampler::new(Some(&poly), params.variant, params.oracle, w, &start, membership_bound)?;
    if samples.is_empty() {
        // Initial generation: N chained walk points in P itself.
        for _ in 0..n {
            samples.push(sampler.next_sample(rng)?);
        }
    }

    let outcome = run_phases(&mut sampler, samples, r, d, n, None, rng)?;
    let log_inner = ball_log_volume(d, radius_at(d, outcome.alpha))?;
    let volume = (log_inner + outcome.log_ratio_sum - det_correction.ln()).exp();
    let ratios = outcome.counts.iter().map(|&c| c as f64 / n as f64).collect();
    Ok(VolumeEstimate {
        volume,
        n,
        w,
        alpha: outcome.alpha,
        beta: outcome.beta,
        counts: outcome.counts,
        ratios,
        det_correction,
        elapsed_seconds: t0.elapsed().as_secs_f64(),
        seed: rng.seed(),
        stream: rng.stream(),
    })
}

/// Run the multiphase machinery over a plain ball body. Every phase ratio
/// is then an exact ball-in-ball volume ratio, so the output must match
/// the closed-form ball volume up to sampling noise; this validates the
/// phase bookkeeping end to end without any polytope in the way.
pub fn estimate_ball_volume(
    ball: &Ball,
    epsilon: f64,
    variant: WalkVariant,
    walk_len: Option<usize>,
    rng: &mut RngStream,
) -> Result<VolumeEstimate> {
    let t0 = Instant::now();
    let d = ball.dim();
    let n = sample_count(d, epsilon)?;
    let w = walk_len.unwrap_or_else(|| default_walk_length(d));
    if w == 0 {
        return Err(Error::Numerical("walk length must be at least 1".into()));
    }
    let body = Ball::new(vec![0.0; d], ball.radius)?;
    let start = random_point_in_ball(&body, rng);
    let mut sampler = Sampler::new(None, variant, OracleKind::Facet, w, &start, None)?;
    sampler.set_ball(Some(body.clone()))?;
    let mut samples = Vec::with_capacity(n);
    for _ in 0..n {
        samples.push(sampler.next_sample(rng)?);
    }
    let outcome = run_phases(&mut sampler, samples, body.radius, d, n, Some(body.radius), rng)?;
    let log_inner = ball_log_volume(d, radius_at(d, outcome.alpha))?;
    let volume = (log_inner + outcome.log_ratio_sum).exp();
    let ratios = outcome.counts.iter().map(|&c| c as f64 / n as f64).collect();
    Ok(VolumeEstimate {
        volume,
        n,
        w,
        alpha: outcome.alpha,
        beta: outcome.beta,
        counts: outcome.counts,
        ratios,
        det_correction: 1.0,
        elapsed_seconds: t0.elapsed().as_secs_f64(),
        seed: rng.seed(),
        stream: rng.stream(),
    })
}

/// k independent estimates on substreams i = 0..k of the master stream,
/// merged by repetition index. With the `parallel` feature the runs fan
/// out over the rayon pool; order and results are identical either way.
pub fn estimate_with_statistics(
    p: &HPolytope,
    params: &VolumeParams,
    repetitions: usize,
    exact: Option<f64>,
    master: &RngStream,
) -> Result<RunStatistics> {
    if repetitions == 0 {
        return Err(Error::Numerical("need at least one repetition".into()));
    }
    let run = |i: usize| -> std::result::Result<VolumeEstimate, String> {
        let mut rng = master.substream(i as u64);
        estimate_volume(p, params, &mut rng).map_err(|e| format!("repetition {i}: {e}"))
    };

    #[cfg(feature = "parallel")]
    let results: Vec<std::result::Result<VolumeEstimate, String>> = {
        use rayon::prelude::*;
        (0..repetitions).into_par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<std::result::Result<VolumeEstimate, String>> =
        (0..repetitions).map(run).collect();

    let mut runs = Vec::with_capacity(repetitions);
    let mut failures = Vec::new();
    for outcome in results {
        match outcome {
            Ok(v) => runs.push(v),
            Err(e) => failures.push(e),
        }
    }
    if runs.is_empty() {
        return Err(Error::Numerical(format!(
            "all {repetitions} repetitions failed; first error: {}",
            failures[0]
        )));
    }
    let k = runs.len() as f64;
    let mean = runs.iter().map(|r| r.volume).sum::<f64>() / k;
    let min = runs.iter().map(|r| r.volume).fold(f64::INFINITY, f64::min);
    let max = runs.iter().map(|r| r.volume).fold(f64::NEG_INFINITY, f64::max);
    let std_dev = if runs.len() > 1 {
        (runs.iter().map(|r| (r.volume - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
    } else {
        0.0
    };
    let spread = if mean != 0.0 { (max - min) / mean } else { 0.0 };
    let rel_err_mean = exact.map(|e| (e - mean) / e);
    Ok(RunStatistics {
        repetitions,
        mean,
        min,
        max,
        std_dev,
        rel_err_mean,
        spread,
        exact,
        runs,
        failures,
    })
}
