//! Seedable, splittable random streams.
//!
//! Every random quantity in the toolkit is drawn from a [`StreamRng`], a
//! ChaCha8 generator keyed by a global seed and a 64-bit stream number.
//! ChaCha is counter based, so distinct stream numbers give independent
//! sequences from the same seed, and a stream's output depends on nothing but
//! `(seed, stream)`.
//!
//! Stream numbers are derived from a caller-chosen stream id, a fixed
//! [`Purpose`] tag and an index (for example the position of a link in a
//! scenario):
//!
//! ```text
//! stream = mix(mix(mix(stream_id) ^ purpose) ^ index)
//! ```
//!
//! where `mix` is the SplitMix64 finalizer. Adding a new consumer therefore
//! never shifts the draws seen by existing ones.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Consumers of randomness. The discriminant is part of the stream derivation
/// rule and must never be renumbered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    /// Train/test partition of a dataset.
    Split = 1,
    /// Fast-fading draws of a propagation model.
    Fading = 2,
    /// Frame success draws and rate probing inside the link simulator.
    Link = 3,
    /// Synthetic dataset generation.
    Synthetic = 4,
    /// Row subsampling during boosting.
    Boosting = 5,
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stream number for `(stream_id, purpose, index)`.
pub fn derive_stream(stream_id: u64, purpose: Purpose, index: u64) -> u64 {
    mix(mix(mix(stream_id) ^ purpose as u64) ^ index)
}

#[derive(Debug, Clone)]
pub struct StreamRng {
    inner: ChaCha8Rng,
    seed: u64,
    stream: u64,
}

impl StreamRng {
    /// Generator for a raw stream number.
    pub fn from_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self {
            inner,
            seed,
            stream,
        }
    }

    pub fn new(seed: u64, stream_id: u64, purpose: Purpose, index: u64) -> Self {
        Self::from_stream(seed, derive_stream(stream_id, purpose, index))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Uniform draw in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Uniform index in `0..n`. `n` must be non-zero.
    pub fn index(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }
}

impl RngCore for StreamRng {
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
