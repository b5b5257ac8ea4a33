//! Seeding and variate generation.
//!
//! A run is driven by one 64-bit master seed. Experiment index `i` gets the
//! child seed `child_seed(master, i)`, a SplitMix64 mix of the two. Each
//! trajectory then opens four ChaCha8 streams on its seed, one per consumer
//! (see [`Stream`]), so adding clicks or injections never perturbs the jump
//! sequence.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type SimRng = ChaCha8Rng;

/// Independent random streams opened on a trajectory seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    /// Waiting times, jump selection, interaction phases, scrambles.
    Physics = 0,
    /// Detector efficiency thinning.
    Thinning = 1,
    /// Background clicks.
    Background = 2,
    /// Randomized injection times.
    Schedule = 3,
}

pub fn stream(seed: u64, which: Stream) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which as u64);
    rng
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `index`-th child of `master`.
pub fn child_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index.wrapping_add(1)))
}

/// Uniform on `[0, 1)` with 53 bits of resolution.
pub fn uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random::<f64>()
}

/// Exponential variate of the given rate by inverse CDF.
pub fn exponential<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    -(1.0 - uniform(rng)).ln() / rate
}

pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}
