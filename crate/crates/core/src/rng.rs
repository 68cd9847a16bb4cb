//! Reproducible, splittable random streams.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Stream labels used by the pipeline; trial `t` of a Monte Carlo run uses
/// `trial_stream(t, label)`.
pub const TEXTURE_STREAM: u64 = 1;
pub const SPECKLE_STREAM: u64 = 2;

/// A ChaCha generator keyed by `(seed, stream)`.
///
/// Streams sharing a seed are independent keystreams, so splitting is
/// deterministic and does not depend on the order in which streams are drawn.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    inner: ChaCha12Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha12Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { seed, stream, inner }
    }

    /// Independent sibling stream with the same seed.
    pub fn split(&self, stream: u64) -> Self {
        Self::with_stream(self.seed, stream)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }
}

/// Stream id for `label` within Monte Carlo trial `trial`.
pub fn trial_stream(trial: u64, label: u64) -> u64 {
    ((trial + 1) << 8) | (label & 0xff)
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
