//! Deterministic counter-based random streams.
//!
//! Every draw is a pure function of `(seed, stream tag, index)`, so the
//! i-th value can be produced on any worker without coordination and the
//! output never depends on the thread count or the order of evaluation.
//! The generator is splitmix64 in counter mode: integer-only, so a seed
//! reproduces the identical bit stream on every platform.

/// Golden-ratio increment used by splitmix64.
const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Stafford mix13 finalizer (the splitmix64 output function).
#[inline]
fn mix64(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// An indexed stream of pseudo-random values derived from a seed and a
/// stream tag. Streams with different tags are independent even for the
/// same seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CounterStream {
    key: u64,
}

impl CounterStream {
    pub fn new(seed: u64, tag: u64) -> Self {
        let key = mix64(seed ^ GOLDEN).wrapping_add(mix64(tag.wrapping_mul(GOLDEN) | 1));
        CounterStream { key: mix64(key) }
    }

    /// The `index`-th 64-bit value of the stream.
    #[inline]
    pub fn u64_at(&self, index: u64) -> u64 {
        mix64(
            self.key
                .wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN)),
        )
    }

    /// The `index`-th uniform double in `[0, 1)`, built from 53 random bits.
    #[inline]
    pub fn unit_f64_at(&self, index: u64) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        (self.u64_at(index) >> 11) as f64 * SCALE
    }
}
