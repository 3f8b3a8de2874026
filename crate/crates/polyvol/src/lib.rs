//! Volume approximation for convex polytopes in halfspace form.
//!
//! The estimator runs a multiphase Monte Carlo over a sequence of balls
//! intersected with the polytope, sampling each phase with hit-and-run
//! random walks. Skinny instances can first be rounded by the minimum
//! volume enclosing ellipsoid of a sample.

pub mod error;
pub mod generators;
pub mod geometry;
pub mod linalg;
pub mod lp;
pub mod oracles;
pub mod reduce;
pub mod rng;
pub mod rounding;
pub mod volume;
pub mod walks;

pub use error::{Error, Result};
pub use geometry::{Ball, Ellipsoid, HPolytope, Point};
pub use rng::RngStream;
