//! Pinned splitmix64 generator.
//!
//! Every random draw in this crate goes through this module, and the exact
//! bit-level behaviour is part of the crate's compatibility contract: a
//! reimplementation in another language that follows the same update and the
//! same derived-draw definitions reproduces every cohort byte for byte.
//!
//! Derived draws:
//! * `uniform01` takes the top 53 bits of `next_u64` and scales by 2^-53,
//!   giving a value in [0, 1).
//! * `randint(lo, hi)` is `lo + floor(u * (hi - lo + 1))`, inclusive of both
//!   endpoints.
//! * `uniform(lo, hi)` is `lo + u * (hi - lo)`.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// 2^-53; scales a 53-bit draw into [0, 1).
const U53_SCALE: f64 = 1.0 / ((1u64 << 53) as f64);

#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Independent stream for element `i` of a sequence. Streams are
    /// decorrelated from their neighbours, so elements can be drawn in any
    /// order (or in parallel) without changing the result.
    pub fn for_element(master_seed: u64, i: u64) -> Self {
        Self::new(master_seed ^ i.wrapping_mul(GOLDEN_GAMMA))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw in [0, 1) with 53 bits of precision.
    pub fn uniform01(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * U53_SCALE
    }

    /// Uniform integer in [lo, hi], both ends inclusive.
    pub fn randint(&mut self, lo: u64, hi: u64) -> u64 {
        debug_assert!(lo <= hi);
        let span = (hi - lo + 1) as f64;
        loop {
            let u = self.uniform01();
            let offset = (u * span).floor();
            // u < 1.0 always holds, so offset < span; the guard only protects
            // the inclusive contract against a rounding surprise.
            if offset < span {
                return lo + offset as u64;
            }
        }
    }

    /// Uniform draw in [lo, hi).
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + self.uniform01() * (hi - lo)
    }
}
