#![allow(dead_code)]

use core_gauge::{sample_market, MarketConfig, MarketRealization};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random market with at most `max_side` agents per side, up to three types
/// per side and values drawn from {-1, 0, 1, 3}.
pub fn small_market(seed: u64, max_side: usize) -> MarketRealization {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let kk = rng.random_range(1..=3);
    let qq = rng.random_range(1..=3);
    let n_l = rng.random_range(kk..=max_side.max(kk));
    let n_e = rng.random_range(qq..=max_side.max(qq));
    let split = |n: usize, t: usize, rng: &mut ChaCha8Rng| {
        let mut counts = vec![1; t];
        for _ in t..n {
            counts[rng.random_range(0..t)] += 1;
        }
        counts
    };
    let w = split(n_l, kk, &mut rng);
    let e = split(n_e, qq, &mut rng);
    let choices = [-1.0, 0.0, 1.0, 3.0];
    let u = (0..kk)
        .map(|_| (0..qq).map(|_| choices[rng.random_range(0..4)]).collect())
        .collect();
    sample_market(&MarketConfig::new(w, e, u).with_seed(seed)).unwrap()
}
