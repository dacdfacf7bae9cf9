use core_gauge::{sample_market, solve, type_adjacency_graph, MarketConfig, MarketRealization};
use proptest::prelude::*;

fn one_type(n_l: usize, n_e: usize, u: f64, seed: u64) -> MarketRealization {
    sample_market(&MarketConfig::new(vec![n_l], vec![n_e], vec![vec![u]]).with_seed(seed)).unwrap()
}

fn max_gap(mut xs: Vec<f64>) -> f64 {
    xs.extend([0.0, 1.0]);
    xs.sort_by(f64::total_cmp);
    xs.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn balanced_core_size_is_closed_form(n in 1usize..50, u in prop::sample::select(vec![0.0, 1.0, 2.0]), seed: u64) {
        let real = one_type(n, n, u, seed);
        let sol = solve(&real).unwrap();
        let min_eta = real.eta.iter().map(|e| e[0]).fold(f64::INFINITY, f64::min);
        let min_eps = real.epsilon.iter().map(|e| e[0]).fold(f64::INFINITY, f64::min);
        prop_assert!((sol.bounds.core_size - (u + min_eta + min_eps)).abs() <= 1e-12);
        // nobody is left unmatched, so the single component carries no mark
        prop_assert_eq!(type_adjacency_graph(&real, &sol.matching).unmarked_components, 1);
    }

    #[test]
    fn one_extra_employer_collapses_the_core(n in 1usize..50, u in prop::sample::select(vec![0.5, 1.0, 2.0]), seed: u64) {
        let real = one_type(n, n + 1, u, seed);
        let sol = solve(&real).unwrap();
        let gap = max_gap(real.epsilon.iter().map(|e| e[0]).collect());
        prop_assert!(sol.bounds.core_size <= gap + 1e-9);
        prop_assert_eq!(type_adjacency_graph(&real, &sol.matching).unmarked_components, 0);
    }
}
