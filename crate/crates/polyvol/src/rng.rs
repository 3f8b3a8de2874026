//! Seeded random stream with splittable substreams.
//!
//! Every stochastic routine in the crate draws from an `RngStream`. The
//! backend is ChaCha8, a counter-based stream cipher RNG: the same seed
//! always reproduces the same sequence, and `substream(i)` yields an
//! independent stream for repetition i without touching the parent.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone)]
pub struct RngStream {
    rng: ChaCha8Rng,
    seed: u64,
    stream: u64,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(0);
        RngStream { rng, seed, stream: 0 }
    }

    /// Independent stream for the given repetition index. Substreams of the
    /// same seed never overlap; substream state is unaffected by how much
    /// the parent has been consumed.
    pub fn substream(&self, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index.wrapping_add(1));
        RngStream { rng, seed: self.seed, stream: index.wrapping_add(1) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Uniform draw from [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    /// Standard normal draw.
    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Uniform integer from [0, k). k must be positive.
    pub fn uniform_int(&mut self, k: usize) -> usize {
        debug_assert!(k > 0);
        self.rng.gen_range(0..k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_sequence() {
        let mut a = RngStream::new(42);
        let mut b = RngStream::new(42);
        for _ in 0..100 {
            assert_eq!(a.uniform().to_bits(), b.uniform().to_bits());
            assert_eq!(a.standard_normal().to_bits(), b.standard_normal().to_bits());
            assert_eq!(a.uniform_int(17), b.uniform_int(17));
        }
    }

    #[test]
    fn substreams_are_independent_of_parent_consumption() {
        let mut a = RngStream::new(9);
        let b = RngStream::new(9);
        for _ in 0..1000 {
            a.uniform();
        }
        let mut sa = a.substream(3);
        let mut sb = b.substream(3);
        for _ in 0..50 {
            assert_eq!(sa.uniform().to_bits(), sb.uniform().to_bits());
        }
    }

    #[test]
    fn distinct_substreams_differ() {
        let root = RngStream::new(1);
        let mut s0 = root.substream(0);
        let mut s1 = root.substream(1);
        let a: Vec<u64> = (0..8).map(|_| s0.uniform().to_bits()).collect();
        let b: Vec<u64> = (0..8).map(|_| s1.uniform().to_bits()).collect();
        assert_ne!(a, b);
    }

    #[test]
    fn uniform_in_unit_interval() {
        let mut r = RngStream::new(5);
        for _ in 0..10_000 {
            let u = r.uniform();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn uniform_int_hits_all_residues() {
        let mut r = RngStream::new(5);
        let mut seen = [false; 7];
        for _ in 0..1000 {
            seen[r.uniform_int(7)] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn normal_moments_sane() {
        let mut r = RngStream::new(123);
        let n = 100_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            let x = r.standard_normal();
            sum += x;
            sum_sq += x * x;
        }
        let mean = sum / n as f64;
        let var = sum_sq / n as f64 - mean * mean;
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((var - 1.0).abs() < 0.03, "var {var}");
    }
}
