//! Fixtures shared by the benchmarks in `benches/`.

use core_gauge::{sample_market, MarketConfig, MarketRealization, PointCloud};

/// Two worker and two employer types with about `n` agents in total and
/// slightly more employers than workers.
pub fn two_by_two_market(n: usize, seed: u64) -> MarketRealization {
    let w = n * 48 / 100;
    let e = n - w;
    let config = MarketConfig::new(
        vec![w / 2, w - w / 2],
        vec![e * 47 / 100, e - e * 47 / 100],
        vec![vec![1.0, 0.5], vec![0.5, 1.0]],
    )
    .with_seed(seed);
    sample_market(&config).expect("valid fixture config")
}

/// Deterministic pseudo-uniform cloud (a Weyl sequence per coordinate).
pub fn weyl_cloud(n: usize, dim: usize) -> PointCloud {
    let steps = [0.618_033_988_749_895, 0.754_877_666_246_693, 0.569_840_290_998_053];
    let points = (0..n)
        .map(|i| (0..dim).map(|d| ((i + 1) as f64 * steps[d % 3]).fract()).collect())
        .collect();
    PointCloud::new(dim, points).expect("points lie in the unit cube")
}
