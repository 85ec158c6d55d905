//! SplitMix64 (from `rand_xoshiro`), used wherever a seed is accepted so that sampled runs can be
//! reproduced bit for bit by other implementations:
//!
//! ```text
//! state = state + 0x9E3779B97F4A7C15
//! z = (state ^ (state >> 30)) * 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! output z ^ (z >> 31)
//! ```
//!
//! with wrapping arithmetic on 64 bits.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64 as Inner;

#[derive(Clone, Debug)]
pub struct SplitMix64 {
    inner: Inner,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 {
            inner: Inner::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `0..n` by rejection.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        let zone = u64::MAX - u64::MAX % n;
        loop {
            let x = self.next_u64();
            if x < zone {
                return x % n;
            }
        }
    }

    /// `count` fair bits: bit `i` is bit `i % 64` of output `i / 64`.
    pub fn bits(&mut self, count: usize) -> Vec<bool> {
        let mut out = Vec::with_capacity(count);
        let mut word = 0;
        for i in 0..count {
            if i % 64 == 0 {
                word = self.next_u64();
            }
            out.push(word >> (i % 64) & 1 == 1);
        }
        out
    }
}
