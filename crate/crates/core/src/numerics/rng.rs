//! Seeded deterministic random source.
//!
//! The generator is pinned to a fixed, named algorithm so that any
//! implementation can reproduce the exact draw sequence:
//!
//! - Core stream: **xoshiro256++** (Blackman & Vigna), state seeded by
//!   expanding the 64-bit seed through four successive **SplitMix64** steps.
//! - Uniform doubles: `(next_u64() >> 11) as f64 * 2^-53`, i.e. 53 random
//!   mantissa bits mapped to `[0, 1)`.
//! - Gaussians: **Box–Muller**, exactly two uniform draws per call:
//!   `sqrt(-2 ln u1) * cos(2 pi u2)` with `u1 = 1 - next_f64()` in `(0, 1]`
//!   and `u2 = next_f64()`. The sine branch is discarded.
//! - Bounded integers: rejection sampling below the largest multiple of the
//!   bound, so draws are exactly uniform.
//!
//! Integer state transitions are exact on every platform; the float mapping
//! is a single rounding, so streams agree bit-for-bit on one platform and to
//! within 1e-12 anywhere `ln`/`cos` differ in the last ulp.

use super::Matrix;

const SPLITMIX_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(SPLITMIX_GAMMA);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// Derive a stage-specific subseed from a base seed and a stage label.
///
/// Defined as `splitmix64(seed XOR fnv1a64(label))`, so every pipeline stage
/// gets an independent, individually rerunnable stream.
pub fn derive_subseed(seed: u64, label: &str) -> u64 {
    let mut state = seed ^ fnv1a64(label.as_bytes());
    splitmix64(&mut state)
}

/// Deterministic PRNG (xoshiro256++ seeded via SplitMix64).
#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    s: [u64; 4],
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        let mut sm = seed;
        let s = [
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
        ];
        Self { seed, s }
    }

    /// The seed this stream was created from.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Next raw 64-bit output (xoshiro256++ step).
    pub fn next_u64(&mut self) -> u64 {
        let result = self.s[0]
            .wrapping_add(self.s[3])
            .rotate_left(23)
            .wrapping_add(self.s[0]);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }

    /// Uniform double in `[0, 1)` from the top 53 bits of one draw.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard Gaussian via Box–Muller; consumes exactly two uniforms.
    pub fn next_gaussian(&mut self) -> f64 {
        let u1 = 1.0 - self.next_f64(); // (0, 1]: keeps ln finite
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Uniform integer in `[0, bound)`. `bound` must be nonzero.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "next_below bound must be nonzero");
        // Largest multiple of `bound` representable in the 2^64 range;
        // rejecting draws at or above it removes modulo bias.
        let limit = ((u64::MAX as u128 + 1) / bound as u128) * bound as u128;
        loop {
            let x = self.next_u64() as u128;
            if x < limit {
                return (x % bound as u128) as u64;
            }
        }
    }

    /// In-place Fisher–Yates shuffle (descending index order).
    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.next_below(i as u64 + 1) as usize;
            xs.swap(i, j);
        }
    }

    /// Fill a matrix with standard Gaussians in row-major order.
    pub fn fill_gaussian(&mut self, m: &mut Matrix) {
        for v in m.data_mut() {
            *v = self.next_gaussian();
        }
    }
}
