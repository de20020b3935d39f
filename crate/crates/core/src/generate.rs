//! Seeded random instance generators with an exact density window.
//!
//! The generator is xoshiro256** seeded through SplitMix64
//! (`SeedableRng::seed_from_u64`). Integers in `[lo, hi]` are drawn by
//! rejection: draws at or above `(2^64 / span) * span` are discarded and the
//! rest reduced modulo `span`.

use alloc::vec::Vec;

use num_bigint::BigInt;
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

use crate::error::{CoreError, Result};
use crate::instance::Instance;
use crate::Rational;

/// Inclusive density window accepted by both generators.
pub fn density_window() -> (Rational, Rational) {
    (
        Rational::new(BigInt::from(89), BigInt::from(100)),
        Rational::new(BigInt::from(91), BigInt::from(100)),
    )
}

pub struct InstanceSampler {
    rng: Xoshiro256StarStar,
}

impl InstanceSampler {
    pub fn new(seed: u64) -> Self {
        InstanceSampler {
            rng: Xoshiro256StarStar::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform integer in `[lo, hi]`.
    pub fn uniform(&mut self, lo: u64, hi: u64) -> u64 {
        debug_assert!(lo <= hi);
        let span = hi - lo + 1;
        if span == 0 {
            return self.rng.next_u64();
        }
        let limit = (u64::MAX / span) * span;
        loop {
            let x = self.rng.next_u64();
            if x < limit {
                return lo + x % span;
            }
        }
    }

    /// Draws `n` in `sizes`, then `n` values in `values`, until the exact
    /// density lies in the window.
    pub fn sample(&mut self, sizes: (u64, u64), values: (u64, u64)) -> Instance {
        let (lo, hi) = density_window();
        loop {
            let n = self.uniform(sizes.0, sizes.1);
            let periods: Vec<u64> = (0..n).map(|_| self.uniform(values.0, values.1)).collect();
            let instance = Instance::from_integers(&periods);
            let d = instance.density();
            if d >= lo && d <= hi {
                return instance;
            }
        }
    }
}

/// `n` in `[10, 15]`, values in `[1, 25]`.
pub fn gen_density(seed: u64, count: usize) -> Vec<Instance> {
    let mut sampler = InstanceSampler::new(seed);
    (0..count).map(|_| sampler.sample((10, 15), (1, 25))).collect()
}

/// `n` in `[max/3, 2max/3]`, values in `[max/2, max]`.
pub fn gen_scaling(max_param: u64, seed: u64, count: usize) -> Result<Vec<Instance>> {
    if max_param < 6 {
        return Err(CoreError::InvalidParams(alloc::format!("maxParam {max_param} is below 6")));
    }
    let mut sampler = InstanceSampler::new(seed);
    let sizes = (max_param / 3, 2 * max_param / 3);
    let values = (max_param / 2, max_param);
    Ok((0..count).map(|_| sampler.sample(sizes, values)).collect())
}
