//! Benchmark polytope constructors.
//!
//! Every generator returns an H-polytope with a known or well-studied volume,
//! which makes them the test bed for the estimator: cubes, cross polytopes,
//! simplices and their products, a deliberately ill-conditioned rotated box,
//! random sphere-tangent polytopes, and Birkhoff polytopes of doubly
//! stochastic matrices. `GeneratorSpec` parses the `kind:params` strings the
//! command line accepts (`cube:10`, `rh:8,40`, `birkhoff:5`).

use std::f64::consts::LN_2;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::HPolytope;
use crate::linalg::Matrix;
use crate::reduce::{reduce_to_full_dimension, AffineMap};
use crate::rng::RngStream;
use crate::walks::random_unit_vector;

/// Largest dimension accepted by [`cross`]; the representation has `2^d` rows.
pub const CROSS_DIM_LIMIT: usize = 25;

/// Redraw attempts before [`random_tangent`] gives up on boundedness.
const TANGENT_MAX_ATTEMPTS: usize = 100;

/// Axis-aligned cube `[-1, 1]^d`, rows ordered `+e_i, -e_i` per coordinate.
///
/// `m = 2d`, exact volume `2^d`.
pub fn cube(d: usize) -> Result<HPolytope> {
    if d == 0 {
        return Err(Error::ZeroDimensional);
    }
    let mut rows = Vec::with_capacity(2 * d);
    for i in 0..d {
        let mut plus = vec![0.0; d];
        plus[i] = 1.0;
        let mut minus = vec![0.0; d];
        minus[i] = -1.0;
        rows.push(plus);
        rows.push(minus);
    }
    HPolytope::from_rows(&rows, vec![1.0; 2 * d])
}

/// Cross polytope `conv{±e_i}`, one row per sign pattern of `Σ ±x_i ≤ 1`.
///
/// `m = 2^d`, exact volume `2^d / d!`. Dimensions above [`CROSS_DIM_LIMIT`]
/// are rejected because the row count explodes.
pub fn cross(d: usize) -> Result<HPolytope> {
    if d == 0 {
        return Err(Error::ZeroDimensional);
    }
    if d > CROSS_DIM_LIMIT {
        return Err(Error::Generator(format!(
            "cross polytope in dimension {d} would need 2^{d} rows; the limit is {CROSS_DIM_LIMIT}"
        )));
    }
    let m = 1usize << d;
    let mut rows = Vec::with_capacity(m);
    for mask in 0..m {
        let row = (0..d)
            .map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 })
            .collect();
        rows.push(row);
    }
    HPolytope::from_rows(&rows, vec![1.0; m])
}

/// Standard simplex `{x ≥ 0, Σ x_i ≤ 1}`.
///
/// `m = d + 1`, exact volume `1/d!`.
pub fn simplex(d: usize) -> Result<HPolytope> {
    if d == 0 {
        return Err(Error::ZeroDimensional);
    }
    let mut rows = Vec::with_capacity(d + 1);
    let mut b = vec![0.0; d + 1];
    for i in 0..d {
        let mut row = vec![0.0; d];
        row[i] = -1.0;
        rows.push(row);
    }
    rows.push(vec![1.0; d]);
    b[d] = 1.0;
    HPolytope::from_rows(&rows, b)
}

/// Product of two standard d-simplices, living in dimension `2d`.
///
/// `m = 2d + 2`, exact volume `(1/d!)^2`.
pub fn simplex_product(d: usize) -> Result<HPolytope> {
    if d == 0 {
        return Err(Error::ZeroDimensional);
    }
    let dim = 2 * d;
    let mut rows = Vec::with_capacity(dim + 2);
    let mut b = Vec::with_capacity(dim + 2);
    for block in 0..2 {
        let offset = block * d;
        for i in 0..d {
            let mut row = vec![0.0; dim];
            row[offset + i] = -1.0;
            rows.push(row);
            b.push(0.0);
        }
        let mut sum = vec![0.0; dim];
        sum[offset..offset + d].fill(1.0);
        rows.push(sum);
        b.push(1.0);
    }
    HPolytope::from_rows(&rows, b)
}

/// Box `[-100, 100] × [-1, 1]^{d-1}` with its facet normals rotated 30° in
/// the plane of the first two coordinates.
///
/// The rotation is orthogonal, so the exact volume stays `100 · 2^d`, but the
/// body is badly aligned with the axes: the natural stress test for rounding.
pub fn skinny_cube(d: usize) -> Result<HPolytope> {
    if d < 2 {
        return Err(Error::Generator(format!(
            "skinny cube needs dimension >= 2 to have a plane to rotate in, got {d}"
        )));
    }
    let (sin, cos) = 30f64.to_radians().sin_cos();
    let mut rows = Vec::with_capacity(2 * d);
    let mut b = Vec::with_capacity(2 * d);
    for i in 0..d {
        let bound = if i == 0 { 100.0 } else { 1.0 };
        for sign in [1.0, -1.0] {
            let mut row = vec![0.0; d];
            row[i] = sign;
            let (a0, a1) = (row[0], row[1]);
            row[0] = a0 * cos - a1 * sin;
            row[1] = a0 * sin + a1 * cos;
            rows.push(row);
            b.push(bound);
        }
    }
    HPolytope::from_rows(&rows, b)
}

/// `m` halfspaces tangent to the unit sphere with uniformly random normals.
///
/// Every accepted output contains the unit ball (each facet hyperplane is at
/// distance exactly 1 from the origin), so the Chebyshev radius is at least 1.
/// Draws are repeated until the LP boundedness check passes; `m ≥ d + 1` is
/// required since fewer halfspaces can never bound.
pub fn random_tangent(d: usize, m: usize, rng: &mut RngStream) -> Result<HPolytope> {
    if d == 0 {
        return Err(Error::ZeroDimensional);
    }
    if m < d + 1 {
        return Err(Error::Generator(format!(
            "tangent polytope needs at least {} halfspaces in dimension {d}, got {m}",
            d + 1
        )));
    }
    for _ in 0..TANGENT_MAX_ATTEMPTS {
        let rows: Vec<Vec<f64>> = (0..m).map(|_| random_unit_vector(d, rng)).collect();
        let p = HPolytope::from_rows(&rows, vec![1.0; m])?;
        if p.check_bounded()? {
            return Ok(p);
        }
    }
    Err(Error::Generator(format!(
        "no bounded tangent polytope with d={d}, m={m} after {TANGENT_MAX_ATTEMPTS} draws"
    )))
}

/// Birkhoff polytope of `n × n` doubly stochastic matrices, reduced to its
/// `(n-1)^2` free entries.
pub fn birkhoff(n: usize) -> Result<HPolytope> {
    birkhoff_with_map(n).map(|(p, _)| p)
}

/// [`birkhoff`] plus the affine map lifting reduced points back to the full
/// matrix, row-major.
///
/// The full description has `n^2` nonnegative entries tied by `2n - 1`
/// independent sum equalities (all row sums, all but the last column sum; the
/// remaining column sum is implied). Eliminating the equalities leaves the
/// leading `(n-1) × (n-1)` block of the matrix as the free variables and
/// exactly `n^2` inequality rows: one per matrix entry.
pub fn birkhoff_with_map(n: usize) -> Result<(HPolytope, AffineMap)> {
    if n < 2 {
        return Err(Error::Generator(format!(
            "Birkhoff polytope needs n >= 2, got {n}"
        )));
    }
    let vars = n * n;
    // Column order handed to the eliminator: dependent entries first (last
    // matrix column above the corner, then the whole last row), so the pivot
    // search consumes exactly those and the leading block survives as the
    // free variables in row-major order.
    let mut perm = Vec::with_capacity(vars);
    for i in 0..n - 1 {
        perm.push(i * n + (n - 1));
    }
    for j in 0..n {
        perm.push((n - 1) * n + j);
    }
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            perm.push(i * n + j);
        }
    }
    debug_assert_eq!(perm.len(), vars);

    let n_eq = 2 * n - 1;
    let mut aeq = Matrix::zeros(n_eq, vars);
    for (new_col, &orig) in perm.iter().enumerate() {
        let (i, j) = (orig / n, orig % n);
        aeq.set(i, new_col, 1.0);
        if j < n - 1 {
            aeq.set(n + j, new_col, 1.0);
        }
    }
    let beq = vec![1.0; n_eq];
    let (p, permuted) = reduce_to_full_dimension(&aeq, &beq)?;

    // Undo the column permutation so the lift reports entries row-major.
    let d = permuted.domain_dim();
    let mut offset = vec![0.0; vars];
    let mut linear = Matrix::zeros(vars, d);
    for (new_col, &orig) in perm.iter().enumerate() {
        offset[orig] = permuted.offset()[new_col];
        for k in 0..d {
            linear.set(orig, k, permuted.linear().get(new_col, k));
        }
    }
    Ok((p, AffineMap::new(offset, linear)))
}

/// A parsed generator request in the `kind:params` command-line form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorSpec {
    Cube { d: usize },
    Cross { d: usize },
    Simplex { d: usize },
    SimplexProduct { d: usize },
    SkinnyCube { d: usize },
    RandomTangent { d: usize, m: usize },
    Birkhoff { n: usize },
}

impl GeneratorSpec {
    /// Parses strings like `cube:10`, `simplex-product:5`, `rh:8,40`,
    /// `birkhoff:5`. `random-tangent` is accepted as an alias for `rh`,
    /// and `_` may be written for `-`.
    pub fn parse(text: &str) -> Result<Self> {
        let (kind, params) = text.split_once(':').ok_or_else(|| {
            Error::Generator(format!(
                "generator `{text}` is missing parameters; expected kind:params like cube:10"
            ))
        })?;
        let kind = kind.trim().to_ascii_lowercase().replace('_', "-");
        let mut values = Vec::new();
        for field in params.split(',') {
            let field = field.trim();
            let value: usize = field.parse().map_err(|_| {
                Error::Generator(format!(
                    "generator parameter `{field}` is not a nonnegative integer"
                ))
            })?;
            if value == 0 {
                return Err(Error::Generator(format!(
                    "generator parameter in `{text}` must be positive"
                )));
            }
            values.push(value);
        }
        let expect = |n: usize| -> Result<()> {
            if values.len() == n {
                Ok(())
            } else {
                Err(Error::Generator(format!(
                    "generator `{kind}` expects {n} parameter(s), got {}",
                    values.len()
                )))
            }
        };
        let spec = match kind.as_str() {
            "cube" => {
                expect(1)?;
                GeneratorSpec::Cube { d: values[0] }
            }
            "cross" => {
                expect(1)?;
                GeneratorSpec::Cross { d: values[0] }
            }
            "simplex" => {
                expect(1)?;
                GeneratorSpec::Simplex { d: values[0] }
            }
            "simplex-product" => {
                expect(1)?;
                GeneratorSpec::SimplexProduct { d: values[0] }
            }
            "skinny-cube" => {
                expect(1)?;
                GeneratorSpec::SkinnyCube { d: values[0] }
            }
            "rh" | "random-tangent" => {
                expect(2)?;
                GeneratorSpec::RandomTangent {
                    d: values[0],
                    m: values[1],
                }
            }
            "birkhoff" => {
                expect(1)?;
                GeneratorSpec::Birkhoff { n: values[0] }
            }
            other => {
                return Err(Error::Generator(format!(
                    "unknown generator kind `{other}`; known kinds: cube, cross, simplex, \
                     simplex-product, skinny-cube, rh, birkhoff"
                )))
            }
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        match *self {
            GeneratorSpec::Cross { d } if d > CROSS_DIM_LIMIT => Err(Error::Generator(format!(
                "cross polytope dimension {d} exceeds the limit {CROSS_DIM_LIMIT}"
            ))),
            GeneratorSpec::SkinnyCube { d } if d < 2 => Err(Error::Generator(
                "skinny cube needs dimension >= 2".to_string(),
            )),
            GeneratorSpec::RandomTangent { d, m } if m < d + 1 => Err(Error::Generator(format!(
                "rh:{d},{m} cannot be bounded; m must be at least d + 1 = {}",
                d + 1
            ))),
            GeneratorSpec::Birkhoff { n } if n < 2 => Err(Error::Generator(
                "Birkhoff polytope needs n >= 2".to_string(),
            )),
            _ => Ok(()),
        }
    }

    /// Builds the polytope. Only `rh` consumes randomness; the other kinds
    /// ignore the stream.
    pub fn build(&self, rng: &mut RngStream) -> Result<HPolytope> {
        match *self {
            GeneratorSpec::Cube { d } => cube(d),
            GeneratorSpec::Cross { d } => cross(d),
            GeneratorSpec::Simplex { d } => simplex(d),
            GeneratorSpec::SimplexProduct { d } => simplex_product(d),
            GeneratorSpec::SkinnyCube { d } => skinny_cube(d),
            GeneratorSpec::RandomTangent { d, m } => random_tangent(d, m, rng),
            GeneratorSpec::Birkhoff { n } => birkhoff(n),
        }
    }

    /// Exact volume where the family has one in closed form. Birkhoff values
    /// are vetted constants for small n; `rh` has no exact volume.
    pub fn known_volume(&self) -> Option<f64> {
        match *self {
            GeneratorSpec::Cube { d } => Some((d as f64).exp2()),
            GeneratorSpec::Cross { d } => Some((d as f64 * LN_2 - ln_factorial(d)).exp()),
            GeneratorSpec::Simplex { d } => Some((-ln_factorial(d)).exp()),
            GeneratorSpec::SimplexProduct { d } => Some((-2.0 * ln_factorial(d)).exp()),
            GeneratorSpec::SkinnyCube { d } => Some(100.0 * (d as f64).exp2()),
            GeneratorSpec::RandomTangent { .. } => None,
            GeneratorSpec::Birkhoff { n } => match n {
                2 => Some(1.0),
                3 => Some(0.125),
                5 => Some(2.25e-7),
                _ => None,
            },
        }
    }
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            GeneratorSpec::Cube { d } => write!(f, "cube:{d}"),
            GeneratorSpec::Cross { d } => write!(f, "cross:{d}"),
            GeneratorSpec::Simplex { d } => write!(f, "simplex:{d}"),
            GeneratorSpec::SimplexProduct { d } => write!(f, "simplex-product:{d}"),
            GeneratorSpec::SkinnyCube { d } => write!(f, "skinny-cube:{d}"),
            GeneratorSpec::RandomTangent { d, m } => write!(f, "rh:{d},{m}"),
            GeneratorSpec::Birkhoff { n } => write!(f, "birkhoff:{n}"),
        }
    }
}

impl FromStr for GeneratorSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GeneratorSpec::parse(s)
    }
}

fn ln_factorial(d: usize) -> f64 {
    (2..=d).map(|k| (k as f64).ln()).sum()
}
