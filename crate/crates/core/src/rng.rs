//! Deterministic random streams.
//!
//! Every stochastic input is drawn from ChaCha20 (a counter-based generator)
//! keyed by the run seed. Independent consumers use disjoint 64-bit stream
//! ids, so the sequence seen by one consumer never depends on how many
//! numbers another consumer draws, or on how many consumers exist:
//!
//! | stream id            | consumer                                  |
//! |----------------------|-------------------------------------------|
//! | `0`                  | classical detuning noise                  |
//! | `1`                  | detection shot noise                      |
//! | `MODE_BASE + k`      | thermal bath of mechanical mode `k`       |
//!
//! Appending a mode therefore leaves the noise of modes `0..k` untouched.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

pub const DETUNING_NOISE_STREAM: u64 = 0;
pub const SHOT_NOISE_STREAM: u64 = 1;
pub const MODE_BASE: u64 = 1 << 32;

/// A seeded stream of standard-normal and uniform deviates.
#[derive(Clone, Debug)]
pub struct NoiseStream {
    rng: ChaCha20Rng,
}

impl NoiseStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng }
    }

    pub fn for_mode(seed: u64, mode_index: usize) -> Self {
        Self::new(seed, MODE_BASE + mode_index as u64)
    }

    #[inline]
    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Uniform deviate in `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }
}
