//! Small-instance ground truth: exhaustive matching, direct blocking-pair
//! checks and an all-pairs closure of the price constraints.
//!
//! Nothing here calls into the matching or corepoly algorithms so the two
//! sides can be compared.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corepoly::{ConstraintGraph, CoreBounds, NodeBounds};
use crate::error::{Error, Result};
use crate::market::MarketRealization;
use crate::matching::Matching;
use crate::TOLERANCE;

pub const MAX_BRUTE_FORCE_SIDE: usize = 8;
pub const MAX_CLOSURE_NODES: usize = 12;

fn phi(real: &MarketRealization, i: usize, j: usize) -> f64 {
    let k = real.worker_type[i];
    let q = real.employer_type[j];
    real.config.u[k][q] + real.epsilon[j][k] + real.eta[i][q]
}

struct Search<'a> {
    real: &'a MarketRealization,
    used: Vec<bool>,
    current: Vec<(usize, usize)>,
    best: Vec<(usize, usize)>,
    best_weight: f64,
}

impl Search<'_> {
    fn run(&mut self, worker: usize, weight: f64) {
        if worker == self.real.n_workers() {
            if weight > self.best_weight {
                self.best_weight = weight;
                self.best = self.current.clone();
            }
            return;
        }
        self.run(worker + 1, weight);
        for j in 0..self.real.n_employers() {
            if !self.used[j] {
                self.used[j] = true;
                self.current.push((worker, j));
                self.run(worker + 1, weight + phi(self.real, worker, j));
                self.current.pop();
                self.used[j] = false;
            }
        }
    }
}

/// Optimal matching by enumerating every matching.
pub fn brute_force_matching(real: &MarketRealization) -> Result<Matching> {
    let (n_l, n_e) = (real.n_workers(), real.n_employers());
    if n_l > MAX_BRUTE_FORCE_SIDE || n_e > MAX_BRUTE_FORCE_SIDE {
        return Err(Error::Capability(format!(
            "exhaustive matching supports at most {MAX_BRUTE_FORCE_SIDE} agents per side, got {n_l}x{n_e}"
        )));
    }
    let mut search = Search {
        real,
        used: vec![false; n_e],
        current: Vec::new(),
        best: Vec::new(),
        best_weight: 0.0,
    };
    search.run(0, 0.0);

    // Pair block members in ascending order, as the main solver does.
    let mut blocks: BTreeMap<(usize, usize), (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for &(i, j) in &search.best {
        if phi(real, i, j) > 0.0 {
            let entry = blocks
                .entry((real.worker_type[i], real.employer_type[j]))
                .or_default();
            entry.0.push(i);
            entry.1.push(j);
        }
    }
    let mut pair_counts = vec![vec![0; real.employer_types()]; real.worker_types()];
    let mut pairs = Vec::new();
    for (&(k, q), (ws, es)) in blocks.iter_mut() {
        ws.sort();
        es.sort();
        pair_counts[k][q] = ws.len();
        pairs.extend(ws.iter().copied().zip(es.iter().copied()));
    }
    pairs.sort();
    let weight = pairs.iter().map(|&(i, j)| phi(real, i, j)).sum();
    let unmatched_workers = (0..n_l).filter(|i| !pairs.iter().any(|p| p.0 == *i)).collect();
    let unmatched_employers = (0..n_e).filter(|j| !pairs.iter().any(|p| p.1 == *j)).collect();
    Ok(Matching {
        pairs,
        unmatched_workers,
        unmatched_employers,
        weight,
        pair_counts,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub stable: bool,
    pub violations: Vec<String>,
}

/// Checks the payoffs induced by `alpha` against every stability condition
/// directly: individual rationality, exact splitting of matched values and
/// no blocking pair among all worker-employer combinations.
pub fn verify_stability(
    real: &MarketRealization,
    m: &Matching,
    alpha: &BTreeMap<(usize, usize), f64>,
) -> Result<StabilityReport> {
    let mut gamma_w = vec![0.0; real.n_workers()];
    let mut gamma_e = vec![0.0; real.n_employers()];
    for &(i, j) in &m.pairs {
        let (k, q) = (real.worker_type[i], real.employer_type[j]);
        let a = *alpha.get(&(k, q)).ok_or_else(|| {
            Error::Usage(format!("price vector has no entry for type pair ({k}, {q})"))
        })?;
        gamma_w[i] = real.config.u[k][q] + real.eta[i][q] - a;
        gamma_e[j] = real.epsilon[j][k] + a;
    }
    let mut violations = Vec::new();
    for (i, g) in gamma_w.iter().enumerate() {
        if *g < -TOLERANCE {
            violations.push(format!("worker {i} payoff {g} < 0"));
        }
    }
    for (j, g) in gamma_e.iter().enumerate() {
        if *g < -TOLERANCE {
            violations.push(format!("employer {j} payoff {g} < 0"));
        }
    }
    for &(i, j) in &m.pairs {
        let gap = gamma_w[i] + gamma_e[j] - phi(real, i, j);
        if gap.abs() > TOLERANCE {
            violations.push(format!("pair ({i}, {j}) payoffs miss its value by {gap}"));
        }
    }
    for i in 0..real.n_workers() {
        for j in 0..real.n_employers() {
            let surplus = phi(real, i, j) - gamma_w[i] - gamma_e[j];
            if surplus > TOLERANCE {
                violations.push(format!("worker {i} and employer {j} block with surplus {surplus}"));
            }
        }
    }
    Ok(StabilityReport {
        stable: violations.is_empty(),
        violations,
    })
}

/// Price extremes by Floyd-Warshall over the nodes and a source vertex.
pub fn closure_bounds(g: &ConstraintGraph) -> Result<CoreBounds> {
    let n = g.nodes.len();
    if n > MAX_CLOSURE_NODES {
        return Err(Error::Capability(format!(
            "closure supports at most {MAX_CLOSURE_NODES} nodes, got {n}"
        )));
    }
    let s = n;
    let mut d = vec![vec![f64::INFINITY; n + 1]; n + 1];
    for (v, row) in d.iter_mut().enumerate() {
        row[v] = 0.0;
    }
    let mut tighten = |a: usize, b: usize, w: f64| {
        if w < d[a][b] {
            d[a][b] = w;
        }
    };
    for e in &g.diff_edges {
        tighten(e.from, e.to, e.bound);
    }
    for v in 0..n {
        tighten(s, v, g.upper_box[v]);
        tighten(v, s, -g.lower_box[v]);
    }
    for via in 0..=n {
        for a in 0..=n {
            for b in 0..=n {
                let through = d[a][via] + d[via][b];
                if through < d[a][b] {
                    d[a][b] = through;
                }
            }
        }
    }
    if (0..=n).any(|v| d[v][v] < -TOLERANCE) {
        return Err(Error::Inconsistency(
            "closure found a negative cycle: price constraints are infeasible".into(),
        ));
    }
    let witness_max: Vec<f64> = (0..n).map(|v| d[s][v]).collect();
    let witness_min: Vec<f64> = (0..n).map(|v| -d[v][s]).collect();
    let nodes: Vec<NodeBounds> = (0..n)
        .map(|v| NodeBounds {
            k: g.nodes[v].0,
            q: g.nodes[v].1,
            n: g.counts[v],
            alpha_min: witness_min[v],
            alpha_max: witness_max[v],
        })
        .collect();
    let total: usize = g.counts.iter().sum();
    let core_size = if total == 0 {
        0.0
    } else {
        nodes.iter().map(|b| b.n as f64 * (b.alpha_max - b.alpha_min)).sum::<f64>() / total as f64
    };
    Ok(CoreBounds {
        nodes,
        witness_min,
        witness_max,
        core_size,
    })
}

/// Price vector keyed by type pair, as taken by [`verify_stability`].
pub fn alpha_map(g: &ConstraintGraph, alpha: &[f64]) -> BTreeMap<(usize, usize), f64> {
    g.nodes.iter().copied().zip(alpha.iter().copied()).collect()
}
