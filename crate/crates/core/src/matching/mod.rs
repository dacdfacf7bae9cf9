//! Maximum-weight bipartite matching between workers and employers.
//!
//! Agents may stay unmatched and pairs with non-positive value are never
//! matched. Results are canonical: inside each (worker type, employer type)
//! block the matched workers and employers are paired in ascending index
//! order. Because the value is additively separable inside a block this
//! leaves the total weight unchanged.

mod flow;
mod hungarian;

use serde::{Deserialize, Serialize};

use crate::market::MarketRealization;

/// Absolute tolerance for the degeneracy scan.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Solver {
    /// Successive shortest paths on the type-compressed flow network.
    #[default]
    Flow,
    /// Dense Hungarian algorithm on the full value matrix.
    Hungarian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matching {
    /// (worker, employer) pairs, sorted.
    pub pairs: Vec<(usize, usize)>,
    pub unmatched_workers: Vec<usize>,
    pub unmatched_employers: Vec<usize>,
    pub weight: f64,
    /// `pair_counts[k][q]` = N(k, q).
    pub pair_counts: Vec<Vec<usize>>,
}

impl Matching {
    /// Builds the canonical matching from an arbitrary valid pair list.
    /// Pairs with non-positive value are discarded first.
    pub fn canonical(real: &MarketRealization, pairs: &[(usize, usize)]) -> Matching {
        let (kk, qq) = (real.worker_types(), real.employer_types());
        let mut workers = vec![vec![Vec::new(); qq]; kk];
        let mut employers = vec![vec![Vec::new(); qq]; kk];
        for &(i, j) in pairs {
            if real.value(i, j) <= 0.0 {
                continue;
            }
            let (k, q) = (real.worker_type[i], real.employer_type[j]);
            workers[k][q].push(i);
            employers[k][q].push(j);
        }
        let mut out = Vec::with_capacity(pairs.len());
        let mut pair_counts = vec![vec![0; qq]; kk];
        for k in 0..kk {
            for q in 0..qq {
                let (w, e) = (&mut workers[k][q], &mut employers[k][q]);
                w.sort_unstable();
                e.sort_unstable();
                out.extend(w.iter().copied().zip(e.iter().copied()));
                pair_counts[k][q] = w.len();
            }
        }
        out.sort_unstable();
        Self::assemble(real, out, pair_counts)
    }

    fn assemble(
        real: &MarketRealization,
        pairs: Vec<(usize, usize)>,
        pair_counts: Vec<Vec<usize>>,
    ) -> Matching {
        let mut worker_used = vec![false; real.n_workers()];
        let mut employer_used = vec![false; real.n_employers()];
        let mut weight = 0.0;
        for &(i, j) in &pairs {
            worker_used[i] = true;
            employer_used[j] = true;
            weight += real.value(i, j);
        }
        let unused = |used: &[bool]| {
            used.iter()
                .enumerate()
                .filter(|(_, &u)| !u)
                .map(|(idx, _)| idx)
                .collect()
        };
        Matching {
            unmatched_workers: unused(&worker_used),
            unmatched_employers: unused(&employer_used),
            pairs,
            weight,
            pair_counts,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn total_pairs(&self) -> usize {
        self.pairs.len()
    }

    /// Partner of each worker and each employer.
    pub fn partners(&self, n_workers: usize, n_employers: usize) -> (Vec<Option<usize>>, Vec<Option<usize>>) {
        let mut w = vec![None; n_workers];
        let mut e = vec![None; n_employers];
        for &(i, j) in &self.pairs {
            w[i] = Some(j);
            e[j] = Some(i);
        }
        (w, e)
    }

    pub fn from_json(text: &str) -> crate::Result<Self> {
        serde_json::from_str(text).map_err(|source| crate::Error::Json {
            context: "matching".into(),
            source,
        })
    }
}

/// Maximum-weight matching with the default solver.
pub fn max_weight_matching(real: &MarketRealization) -> Matching {
    max_weight_matching_with(real, Solver::Flow)
}

pub fn max_weight_matching_with(real: &MarketRealization, solver: Solver) -> Matching {
    let pairs = match solver {
        Solver::Flow => flow::solve(real),
        Solver::Hungarian => hungarian::solve(real),
    };
    Matching::canonical(real, &pairs)
}

/// A near-tie between two pairs that share an agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tie {
    pub first: (usize, usize),
    pub second: (usize, usize),
    pub gap: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DegeneracyReport {
    pub ties: Vec<Tie>,
    /// Pairs whose value is within tolerance of zero.
    pub zero_values: Vec<(usize, usize)>,
}

impl DegeneracyReport {
    pub fn flagged(&self) -> bool {
        !self.ties.is_empty() || !self.zero_values.is_empty()
    }
}

/// Looks for near-ties between values of pairs sharing a worker or an
/// employer, and for values near zero. Either makes the optimal matching
/// possibly non-unique at the type level.
pub fn degeneracy_scan(real: &MarketRealization) -> DegeneracyReport {
    let (n_l, n_e) = (real.n_workers(), real.n_employers());
    let mut report = DegeneracyReport::default();
    let mut row: Vec<(f64, usize)> = Vec::with_capacity(n_l.max(n_e));

    let mut scan = |row: &mut Vec<(f64, usize)>, pair_of: &dyn Fn(usize) -> (usize, usize)| {
        row.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for w in row.windows(2) {
            let gap = w[1].0 - w[0].0;
            if gap <= TIE_TOLERANCE {
                report.ties.push(Tie {
                    first: pair_of(w[0].1),
                    second: pair_of(w[1].1),
                    gap,
                });
            }
        }
    };

    for i in 0..n_l {
        row.clear();
        row.extend((0..n_e).map(|j| (real.value(i, j), j)));
        scan(&mut row, &|j| (i, j));
    }
    for j in 0..n_e {
        row.clear();
        row.extend((0..n_l).map(|i| (real.value(i, j), i)));
        scan(&mut row, &|i| (i, j));
    }
    for i in 0..n_l {
        for j in 0..n_e {
            if real.value(i, j).abs() <= TIE_TOLERANCE {
                report.zero_values.push((i, j));
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{sample_market, MarketConfig};

    /// 2x2 market whose value matrix is `phi`, via `u` alone (zero
    /// productivities) with one type per agent.
    fn from_values(phi: &[Vec<f64>]) -> MarketRealization {
        let (n_l, n_e) = (phi.len(), phi[0].len());
        let config = MarketConfig::new(vec![1; n_l], vec![1; n_e], phi.to_vec());
        MarketRealization::from_parts(config, vec![vec![0.0; n_l]; n_e], vec![vec![0.0; n_e]; n_l])
            .unwrap()
    }

    fn random_market(seed: u64, n_l: usize, n_e: usize, kk: usize, qq: usize) -> MarketRealization {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let split = |n: usize, t: usize, rng: &mut rand_chacha::ChaCha8Rng| {
            let mut counts = vec![1; t];
            for _ in t..n {
                counts[rng.random_range(0..t)] += 1;
            }
            counts
        };
        let w = split(n_l.max(kk), kk, &mut rng);
        let e = split(n_e.max(qq), qq, &mut rng);
        let choices = [-1.0, 0.0, 1.0, 3.0];
        let u = (0..kk)
            .map(|_| (0..qq).map(|_| choices[rng.random_range(0..4)]).collect())
            .collect();
        sample_market(&MarketConfig::new(w, e, u).with_seed(seed)).unwrap()
    }

    #[test]
    fn single_positive_edge_is_matched() {
        let m = max_weight_matching(&from_values(&[vec![2.7]]));
        assert_eq!(m.pairs, vec![(0, 0)]);
        assert!((m.weight - 2.7).abs() < 1e-12);
    }

    #[test]
    fn negative_edge_is_never_matched() {
        for solver in [Solver::Flow, Solver::Hungarian] {
            let m = max_weight_matching_with(&from_values(&[vec![-1.1]]), solver);
            assert!(m.pairs.is_empty());
            assert_eq!(m.unmatched_workers, vec![0]);
            assert_eq!(m.unmatched_employers, vec![0]);
            assert_eq!(m.weight, 0.0);
        }
    }

    #[test]
    fn two_by_two_prefers_diagonal() {
        let real = from_values(&[vec![3.0, 1.0], vec![1.0, 2.9]]);
        for solver in [Solver::Flow, Solver::Hungarian] {
            let m = max_weight_matching_with(&real, solver);
            assert_eq!(m.pairs, vec![(0, 0), (1, 1)]);
            assert!((m.weight - 5.9).abs() < 1e-12);
            assert_eq!(m.pair_counts, vec![vec![1, 0], vec![0, 1]]);
        }
    }

    #[test]
    fn rectangular_markets() {
        let real = from_values(&[vec![1.0, 5.0, 2.0]]);
        assert_eq!(max_weight_matching(&real).pairs, vec![(0, 1)]);
        let real = from_values(&[vec![1.0], vec![5.0], vec![2.0]]);
        assert_eq!(max_weight_matching(&real).pairs, vec![(1, 0)]);
    }

    #[test]
    fn canonical_form_pairs_blocks_in_order() {
        let config = MarketConfig::new(vec![3], vec![3], vec![vec![1.0]]);
        let real = MarketRealization::from_parts(
            config,
            vec![vec![0.1], vec![0.2], vec![0.3]],
            vec![vec![0.4], vec![0.5], vec![0.6]],
        )
        .unwrap();
        let m = Matching::canonical(&real, &[(2, 0), (0, 1), (1, 2)]);
        assert_eq!(m.pairs, vec![(0, 0), (1, 1), (2, 2)]);
        assert_eq!(m.pair_counts, vec![vec![3]]);
    }

    fn best_swap_gain(real: &MarketRealization, m: &Matching) -> f64 {
        let (pw, pe) = m.partners(real.n_workers(), real.n_employers());
        let val = |i: usize, j: usize| real.value(i, j);
        let mut best: f64 = 0.0;
        for &(i, j) in &m.pairs {
            best = best.max(-val(i, j));
            for &(i2, j2) in &m.pairs {
                if i != i2 {
                    best = best.max(val(i, j2) + val(i2, j) - val(i, j) - val(i2, j2));
                }
            }
        }
        for i in 0..real.n_workers() {
            for j in 0..real.n_employers() {
                let mut gain = val(i, j);
                if let Some(j0) = pw[i] {
                    gain -= val(i, j0);
                }
                if let Some(i0) = pe[j] {
                    gain -= val(i0, j);
                }
                if pw[i] != Some(j) {
                    best = best.max(gain);
                }
            }
        }
        best
    }

    #[test]
    fn local_optimality_on_random_markets() {
        for seed in 0..200 {
            let real = random_market(seed, 6, 7, 2, 3);
            let m = max_weight_matching(&real);
            assert!(best_swap_gain(&real, &m) <= 1e-9, "seed {seed}");
        }
    }

    #[test]
    fn solvers_agree_at_type_level() {
        for seed in 0..200 {
            let real = random_market(1000 + seed, 12, 10, 3, 2);
            if degeneracy_scan(&real).flagged() {
                continue;
            }
            let a = max_weight_matching_with(&real, Solver::Flow);
            let b = max_weight_matching_with(&real, Solver::Hungarian);
            assert!((a.weight - b.weight).abs() <= 1e-9 * a.weight.abs().max(1.0), "seed {seed}");
            assert_eq!(a.pair_counts, b.pair_counts, "seed {seed}");
            assert_eq!(a.pairs, b.pairs, "seed {seed}");
        }
    }

    #[test]
    fn unmatched_pairs_have_no_surplus() {
        for seed in 0..100 {
            let real = random_market(5000 + seed, 20, 15, 2, 2);
            let m = max_weight_matching(&real);
            for &i in &m.unmatched_workers {
                for &j in &m.unmatched_employers {
                    assert!(real.value(i, j) <= 1e-9);
                }
            }
        }
    }

    #[test]
    fn generic_markets_are_not_degenerate() {
        for seed in 0..10_000 {
            let real = random_market(seed, 6, 6, 2, 2);
            assert!(!degeneracy_scan(&real).flagged(), "seed {seed}");
        }
    }

    #[test]
    fn duplicated_productivity_is_a_tie() {
        let config = MarketConfig::new(vec![1], vec![2], vec![vec![1.0]]);
        let real =
            MarketRealization::from_parts(config, vec![vec![0.4], vec![0.4]], vec![vec![0.2]]).unwrap();
        let report = degeneracy_scan(&real);
        assert!(report.flagged());
        assert_eq!(report.ties[0].first, (0, 0));
        assert_eq!(report.ties[0].second, (0, 1));
    }

    #[test]
    fn zero_value_is_flagged() {
        let config = MarketConfig::new(vec![1], vec![1], vec![vec![-0.5]]);
        let real = MarketRealization::from_parts(config, vec![vec![0.25]], vec![vec![0.25]]).unwrap();
        assert_eq!(degeneracy_scan(&real).zero_values, vec![(0, 0)]);
    }

    #[test]
    fn one_type_matches_short_side() {
        let real = sample_market(&MarketConfig::new(vec![40], vec![55], vec![vec![1.0]]).with_seed(2)).unwrap();
        let m = max_weight_matching(&real);
        assert_eq!(m.pairs.len(), 40);
        assert_eq!(m.unmatched_employers.len(), 15);
    }
}
