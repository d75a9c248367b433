//! Seed derivation and deterministic sampling.
//!
//! Every random quantity in the crate is drawn from a ChaCha8 stream keyed by
//! a `u64` seed. Sub-seeds are derived with [`derive_seed`], a SplitMix64-based
//! hash of the parent seed and a list of context words, so a trial's draws are
//! a pure function of `(master_seed, context)` regardless of thread schedule.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::C64;

/// Counter-based generator used for all sampling.
pub type SimRng = ChaCha8Rng;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a sub-seed from a master seed and context words.
///
/// The scheme is fixed (part of the reproducibility contract): absorb each
/// context word into a SplitMix64 chain started from the master seed.
pub fn derive_seed(master: u64, context: &[u64]) -> u64 {
    let mut h = mix64(master ^ GOLDEN);
    for &word in context {
        h = mix64(h.wrapping_add(GOLDEN) ^ mix64(word));
    }
    h
}

/// Fresh deterministic stream for the given seed.
pub fn stream(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// One standard normal pair via Box-Muller.
pub fn standard_normal_pair(rng: &mut SimRng) -> (f64, f64) {
    loop {
        let u1: f64 = rng.random();
        if u1 > 1e-300 {
            let radius = (-2.0 * u1.ln()).sqrt();
            let angle = std::f64::consts::TAU * rng.random::<f64>();
            return (radius * angle.cos(), radius * angle.sin());
        }
    }
}

/// Circularly-symmetric complex Gaussian with the given variance
/// (`E|z|^2 = variance`): two real normals scaled by `sqrt(variance / 2)`.
pub fn complex_gaussian(rng: &mut SimRng, variance: f64) -> C64 {
    let (re, im) = standard_normal_pair(rng);
    let scale = (variance / 2.0).sqrt();
    C64::new(re * scale, im * scale)
}
