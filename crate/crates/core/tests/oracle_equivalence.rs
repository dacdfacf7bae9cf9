mod common;

use core_gauge::corepoly::feasible_midpoint;
use core_gauge::oracle::{alpha_map, brute_force_matching, closure_bounds, verify_stability};
use core_gauge::{degeneracy_scan, solve};

#[test]
fn solver_matches_exhaustive_search() {
    for seed in 0..400 {
        let real = common::small_market(seed, 6);
        let sol = solve(&real).unwrap();
        let brute = brute_force_matching(&real).unwrap();
        assert!(
            (sol.matching.weight - brute.weight).abs() <= 1e-9,
            "seed {seed}: {} vs {}",
            sol.matching.weight,
            brute.weight
        );
        if !degeneracy_scan(&real).flagged() {
            assert_eq!(sol.matching.pairs, brute.pairs, "seed {seed}");
        }
    }
}

#[test]
fn bounds_match_all_pairs_closure() {
    for seed in 0..400 {
        let real = common::small_market(seed, 6);
        let sol = solve(&real).unwrap();
        let closure = closure_bounds(&sol.graph).unwrap();
        for (a, b) in sol.bounds.nodes.iter().zip(&closure.nodes) {
            assert!((a.alpha_min - b.alpha_min).abs() <= 1e-9, "seed {seed}");
            assert!((a.alpha_max - b.alpha_max).abs() <= 1e-9, "seed {seed}");
        }
        assert!((sol.bounds.core_size - closure.core_size).abs() <= 1e-9);
    }
}

#[test]
fn core_points_are_stable_and_extremes_are_tight() {
    for seed in 0..400 {
        let real = common::small_market(seed, 6);
        let sol = solve(&real).unwrap();
        let g = &sol.graph;
        let mid = feasible_midpoint(g, &sol.bounds).unwrap();
        for alpha in [&sol.bounds.witness_min, &sol.bounds.witness_max, &mid] {
            let report = verify_stability(&real, &sol.matching, &alpha_map(g, alpha)).unwrap();
            assert!(report.stable, "seed {seed}: {:?}", report.violations);
        }
        // Past either extreme of any coordinate the prices stop being stable.
        for a in 0..g.len() {
            let mut up = sol.bounds.witness_max.clone();
            up[a] += 0.01;
            assert!(!verify_stability(&real, &sol.matching, &alpha_map(g, &up)).unwrap().stable, "seed {seed}");
            let mut down = sol.bounds.witness_min.clone();
            down[a] -= 0.01;
            assert!(!verify_stability(&real, &sol.matching, &alpha_map(g, &down)).unwrap().stable, "seed {seed}");
        }
    }
}
