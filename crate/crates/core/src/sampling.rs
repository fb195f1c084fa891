//! Seeded sampling.
//!
//! Points come from SplitMix64: each `u64` is turned into a double in `[0, 1)`
//! from its top 53 bits, then mapped affinely. Runs with the same seed produce
//! the same points on every platform.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

#[derive(Debug, Clone)]
pub struct Sampler {
    rng: SplitMix64,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: SplitMix64::seed_from_u64(seed),
        }
    }

    /// Uniform in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`; rounding never returns `hi`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let v = lo + (hi - lo) * self.unit();
        if v >= hi {
            hi.next_down()
        } else {
            v
        }
    }

    /// A point of `[lo, hi)^d`.
    pub fn point(&mut self, d: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..d).map(|_| self.uniform(lo, hi)).collect()
    }

    /// `n` points of `[lo, hi)^d`.
    pub fn points(&mut self, n: usize, d: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
        (0..n).map(|_| self.point(d, lo, hi)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible_and_in_range() {
        let a = Sampler::new(7).points(100, 2, -0.5, 0.5);
        let b = Sampler::new(7).points(100, 2, -0.5, 0.5);
        assert_eq!(a, b);
        assert!(a.iter().flatten().all(|&v| (-0.5..0.5).contains(&v)));
        assert_ne!(a, Sampler::new(8).points(100, 2, -0.5, 0.5));
    }
}
