//! Named, seeded random substreams.
//!
//! Every stochastic concern (mobility, traffic, jitter, beacon timing) draws
//! from its own stream derived from `(seed, label)`, so changing how much one
//! concern draws never shifts the values another concern sees.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    inner: ChaCha8Rng,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

impl RngStream {
    pub fn new(seed: u64, label: &str) -> Self {
        let mut state = seed ^ fnv1a(label.as_bytes()).rotate_left(17);
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        RngStream { seed, inner: ChaCha8Rng::from_seed(key) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in `[0, n)`; `n` must be non-zero.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "empty range");
        // Lemire's multiply-shift with rejection.
        let zone = n.wrapping_neg() % n;
        loop {
            let x = self.next_u64();
            let m = u128::from(x) * u128::from(n);
            if (m as u64) >= zone {
                return (m >> 64) as u64;
            }
        }
    }
}

/// Convenience constructor matching the named-substream vocabulary.
pub fn rng_stream(seed: u64, label: &str) -> RngStream {
    RngStream::new(seed, label)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn same_label_same_sequence() {
        let a: Vec<u64> = {
            let mut r = rng_stream(7, "traffic");
            (0..1000).map(|_| r.next_u64()).collect()
        };
        let mut r = rng_stream(7, "traffic");
        let b: Vec<u64> = (0..1000).map(|_| r.next_u64()).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn labels_separate_streams() {
        let mut a = rng_stream(7, "traffic");
        let mut b = rng_stream(7, "mobility");
        let xs: Vec<u64> = (0..16).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..16).map(|_| b.next_u64()).collect();
        assert_ne!(xs, ys);
        let mut c = rng_stream(8, "traffic");
        assert_ne!(xs[0], c.next_u64());
    }

    // Pinned draws guard against silent changes in stream derivation, which
    // would break cross-version reproducibility of published runs.
    #[test]
    fn derivation_is_stable() {
        let mut r = rng_stream(42, "mobility");
        assert_eq!(r.next_u64(), 13_493_725_062_005_365_734);
    }

    // 10^6 uniforms: sd of the mean is 1/sqrt(12e6) ~ 2.9e-4; 3 sd < 0.002.
    #[test]
    fn uniform_mean() {
        let mut r = rng_stream(1, "uniform");
        let n = 1_000_000;
        let sum: f64 = (0..n).map(|_| r.next_f64()).sum();
        let mean = sum / n as f64;
        assert!((mean - 0.5).abs() < 0.002, "mean {mean}");
    }

    #[test]
    fn below_is_in_range_and_covers() {
        let mut r = rng_stream(3, "below");
        let mut seen = [0u32; 7];
        for _ in 0..7000 {
            seen[r.below(7) as usize] += 1;
        }
        assert!(seen.iter().all(|&c| c > 800 && c < 1200), "{seen:?}");
    }
}
