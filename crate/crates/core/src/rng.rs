//! Counter-based RNG substreams for reproducible parallel Monte Carlo.
//!
//! Every trial gets its own ChaCha8 stream keyed by `(seed, trial index)`.
//! Which thread executes a trial therefore has no bearing on the numbers it
//! draws, and a run is bit-identical for any worker count as long as partial
//! results are also combined in a fixed order (see `monte_carlo`).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Multiplier from the SplitMix64 generator; consecutive counters land in
/// well-separated regions of the state space.
const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer: a bijective avalanche mix of a 64-bit word.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent generator for one Monte Carlo trial.
///
/// The 256-bit ChaCha key is expanded from `(seed, index)` with SplitMix64,
/// so distinct indices yield statistically independent streams and the
/// mapping is stable across platforms and crate versions.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let base = seed.wrapping_add(index.wrapping_mul(GOLDEN_GAMMA));
    let mut key = [0u8; 32];
    for (word, chunk) in key.chunks_exact_mut(8).enumerate() {
        let z = mix64(base.wrapping_add((word as u64 + 1).wrapping_mul(GOLDEN_GAMMA)));
        chunk.copy_from_slice(&z.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Derive a sub-seed from a master seed and a salt (e.g. a sweep-point index),
/// keeping independent parts of a run on independent substream families.
pub fn mix_seed(seed: u64, salt: u64) -> u64 {
    mix64(seed.wrapping_add(mix64(salt.wrapping_mul(GOLDEN_GAMMA))))
}
