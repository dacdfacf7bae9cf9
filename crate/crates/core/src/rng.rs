//! Order-independent random streams.
//!
//! Every random quantity is drawn from its own ChaCha8 stream whose seed is
//! `seed ^ hash(parts)`, so a value depends only on the global seed and its
//! coordinates (role, agent, dimension, ...), never on iteration order or
//! on which worker thread produced it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const ROLE_EMPLOYER: u64 = 0x45;
pub const ROLE_WORKER: u64 = 0x4c;
pub const ROLE_TRIAL: u64 = 0x54;
pub const ROLE_CLOUD: u64 = 0x50;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hashes a coordinate tuple. Length is folded in so `[a]` and `[a, 0]`
/// land on different streams.
pub fn hash_parts(parts: &[u64]) -> u64 {
    let mut h = mix64(parts.len() as u64);
    for &p in parts {
        h = mix64(h ^ p);
    }
    h
}

pub fn stream_seed(seed: u64, parts: &[u64]) -> u64 {
    seed ^ hash_parts(parts)
}

pub fn stream_rng(seed: u64, parts: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(seed, parts))
}

/// Seed for one Monte Carlo trial. `attempt` is bumped when a trial is
/// resampled after a degeneracy flag.
pub fn trial_seed(seed: u64, grid_index: usize, trial: usize, attempt: u32) -> u64 {
    stream_seed(
        seed,
        &[ROLE_TRIAL, grid_index as u64, trial as u64, attempt as u64],
    )
}
