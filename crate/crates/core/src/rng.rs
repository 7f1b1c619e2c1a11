//! Counter-based splittable random number generation.
//!
//! All randomness in the crate is derived from pure functions of a 64-bit
//! seed and a counter, so any draw can be reproduced without replaying the
//! stream that precedes it. Maps, cells, and histogram samples each get their
//! own stream via [`derive_stream`], which makes ensemble generation
//! order-independent and safe to parallelize.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
const STREAM_TAG_A: u64 = 0x5851_f42d_4c95_7f2d;
const STREAM_TAG_B: u64 = 0x1405_7b7e_f767_814f;

/// SplitMix64 finalizer; a bijective 64-bit mixer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive an independent stream key from a parent seed and an index.
///
/// Both arguments pass through the mixer before combination, so structured
/// inputs (small indices, related seeds) do not produce related streams.
#[inline]
pub fn derive_stream(seed: u64, index: u64) -> u64 {
    mix64(mix64(seed ^ STREAM_TAG_A).wrapping_add(mix64(index ^ STREAM_TAG_B)))
}

/// A keyed counter stream: `value(n) = mix64(key + (n+1)·GOLDEN)`.
///
/// This is the SplitMix64 sequence evaluated at an arbitrary position, which
/// makes it a counter-based generator: the n-th output is a pure function of
/// `(key, n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stream {
    key: u64,
}

impl Stream {
    pub fn new(key: u64) -> Self {
        Stream { key }
    }

    /// The raw 64-bit output at counter position `n`.
    #[inline]
    pub fn at(&self, n: u64) -> u64 {
        mix64(
            self.key
                .wrapping_add(n.wrapping_add(1).wrapping_mul(GOLDEN)),
        )
    }

    /// Uniform double in `[0, 1)` at counter position `n` (53-bit mantissa).
    #[inline]
    pub fn unit_f64(&self, n: u64) -> f64 {
        (self.at(n) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, bound)` at counter position `n`, via the
    /// multiply-shift reduction (bias below 2^-60 for small bounds).
    #[inline]
    pub fn below(&self, n: u64, bound: u64) -> u64 {
        ((self.at(n) as u128 * bound as u128) >> 64) as u64
    }

    /// A child stream keyed off counter position `n`.
    #[inline]
    pub fn substream(&self, n: u64) -> Stream {
        Stream::new(derive_stream(self.key, n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mix64_is_deterministic_and_nontrivial() {
        assert_eq!(mix64(0), mix64(0));
        // zero is the mixer's fixed point; streams never hit it because the
        // counter always carries the golden-ratio increment
        assert_ne!(mix64(1), 1);
        assert_ne!(mix64(1), mix64(2));
        assert_ne!(Stream::new(0).at(0), 0);
    }

    #[test]
    fn streams_are_reproducible() {
        let s = Stream::new(derive_stream(42, 7));
        let t = Stream::new(derive_stream(42, 7));
        for n in 0..100 {
            assert_eq!(s.at(n), t.at(n));
        }
    }

    #[test]
    fn distinct_indices_give_distinct_streams() {
        let a = Stream::new(derive_stream(42, 0));
        let b = Stream::new(derive_stream(42, 1));
        let differing = (0..64).filter(|&n| a.at(n) != b.at(n)).count();
        assert!(differing >= 60);
    }

    #[test]
    fn unit_f64_in_range_and_roughly_uniform() {
        let s = Stream::new(0xdead_beef);
        let n = 100_000;
        let mut sum = 0.0;
        for i in 0..n {
            let u = s.unit_f64(i);
            assert!((0.0..1.0).contains(&u));
            sum += u;
        }
        let mean = sum / n as f64;
        // standard error of the mean is 1/sqrt(12 n) ~ 9e-4; allow 5 sigma
        assert!((mean - 0.5).abs() < 5.0 * 9.2e-4, "mean = {mean}");
    }

    #[test]
    fn below_three_hits_all_residues_evenly() {
        let s = Stream::new(12345);
        let mut counts = [0u64; 3];
        let n = 90_000;
        for i in 0..n {
            counts[s.below(i, 3) as usize] += 1;
        }
        let expect = n as f64 / 3.0;
        let sigma = (expect * (2.0 / 3.0)).sqrt();
        for &c in &counts {
            assert!(
                (c as f64 - expect).abs() < 5.0 * sigma,
                "counts = {counts:?}"
            );
        }
    }
}
