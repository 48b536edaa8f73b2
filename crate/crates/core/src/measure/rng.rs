//! The sampling generator.
//!
//! xoshiro256** seeded from a `u64` through SplitMix64 (the `rand_xoshiro`
//! `seed_from_u64` expansion). Each step updates the 256-bit state with
//! shifts, xors and a rotation and outputs `rotl(s₁·5, 7)·9`. Uniform doubles
//! take the top 53 bits: `(x >> 11)·2⁻⁵³ ∈ [0, 1)`. The output stream is fixed
//! by the algorithm and identical on every platform.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

#[derive(Clone, Debug)]
pub struct SampleRng(Xoshiro256StarStar);

impl SampleRng {
    pub fn new(seed: u64) -> Self {
        SampleRng(Xoshiro256StarStar::seed_from_u64(seed))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible_and_in_range() {
        let mut a = SampleRng::new(7);
        let mut b = SampleRng::new(7);
        for _ in 0..1000 {
            let x = a.uniform();
            assert_eq!(x, b.uniform());
            assert!((0.0..1.0).contains(&x));
        }
        assert_ne!(SampleRng::new(1).next_u64(), SampleRng::new(2).next_u64());
    }

    #[test]
    fn mean_is_half() {
        let mut r = SampleRng::new(42);
        let n = 100_000;
        let mean: f64 = (0..n).map(|_| r.uniform()).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 4.0 * (1.0 / 12.0f64).sqrt() / (n as f64).sqrt());
    }
}
