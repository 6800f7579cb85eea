//! Deterministic random number generation.
//!
//! All randomness in this crate flows through [`SplitMix64`], so a seed pins
//! every generated scenario bit-for-bit across runs and platforms. The
//! algorithm is Steele, Lea and Flood's SplitMix64 (the seeding generator of
//! `java.util.SplittableRandom`), chosen because it is tiny, well known, and
//! trivially portable: no external crate version can shift the stream.

/// SplitMix64 generator. One `u64` of state, one output per step.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw in [0, 1) with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in [lo, hi).
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in [0, n).
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        // Modulo bias is irrelevant at the ranges used here (n << 2^64).
        self.next_u64() % n
    }
}
