//! Core prices over matched type pairs.
//!
//! In a core outcome every matched pair of worker type `k` and employer type
//! `q` splits its value through one price `alpha[k][q]`: the worker gets
//! `eta_tilde - alpha` and the employer `epsilon + alpha`. Stability is then
//! a system of difference constraints `alpha_b - alpha_a <= w` plus boxes
//! `L_a <= alpha_a <= U_a`, solved here by shortest paths.

mod adjacency;
mod audit;

pub use adjacency::{type_adjacency_graph, TypeAdjacencyGraph};
pub use audit::{audit_upper_bound_lemmas, LemmaAudit, TypeAudit, TypeClass};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::MarketRealization;
use crate::matching::Matching;
use crate::TOLERANCE;

/// (worker type, employer type).
pub type TypePair = (usize, usize);

/// `alpha[to] - alpha[from] <= bound`, with node indices into
/// [`ConstraintGraph::nodes`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffEdge {
    pub from: usize,
    pub to: usize,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintGraph {
    /// Type pairs with at least one match, in (k, q) order.
    pub nodes: Vec<TypePair>,
    /// N(k, q) for each node.
    pub counts: Vec<usize>,
    pub diff_edges: Vec<DiffEdge>,
    pub lower_box: Vec<f64>,
    pub upper_box: Vec<f64>,
}

impl ConstraintGraph {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node_index(&self, pair: TypePair) -> Option<usize> {
        self.nodes.binary_search(&pair).ok()
    }

    /// Largest violation of any constraint by `alpha` (0 when feasible).
    pub fn max_violation(&self, alpha: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for e in &self.diff_edges {
            worst = worst.max(alpha[e.to] - alpha[e.from] - e.bound);
        }
        for (a, x) in alpha.iter().enumerate() {
            worst = worst.max(self.lower_box[a] - x).max(x - self.upper_box[a]);
        }
        worst
    }
}

/// Emits every stability constraint on the prices of matched type pairs.
///
/// Besides the pairwise and individual-rationality conditions between
/// matched agents, unmatched agents block through any type pair whose
/// partner side they could poach: an unmatched worker of type `k` bounds
/// every node `(k', q)` from below and an unmatched employer of type `q`
/// bounds every node `(k, q')` from above.
pub fn build_constraint_graph(real: &MarketRealization, m: &Matching) -> Result<ConstraintGraph> {
    let (kk, qq) = (real.worker_types(), real.employer_types());
    for &i in &m.unmatched_workers {
        for &j in &m.unmatched_employers {
            let v = real.value(i, j);
            if v > TOLERANCE {
                return Err(Error::Inconsistency(format!(
                    "unmatched worker {i} and unmatched employer {j} have value {v} > 0"
                )));
            }
        }
    }

    let mut nodes = Vec::new();
    let mut counts = Vec::new();
    for k in 0..kk {
        for q in 0..qq {
            if m.pair_counts[k][q] > 0 {
                nodes.push((k, q));
                counts.push(m.pair_counts[k][q]);
            }
        }
    }
    let index = |pair: TypePair| nodes.binary_search(&pair).expect("node present");
    let n = nodes.len();

    // min_w[b][q] = min over workers at node b=(k',q') of eta_tilde^{q'} - eta_tilde^q
    // min_e[a][k'] = min over employers at node a=(k,q) of eps^k - eps^{k'}
    let mut min_w = vec![vec![f64::INFINITY; qq]; n];
    let mut min_e = vec![vec![f64::INFINITY; kk]; n];
    let mut min_eta = vec![f64::INFINITY; n];
    let mut min_eps = vec![f64::INFINITY; n];
    for &(i, j) in &m.pairs {
        let (k, q) = (real.worker_type[i], real.employer_type[j]);
        let a = index((k, q));
        let own = real.eta_tilde(i, q);
        min_eta[a] = min_eta[a].min(own);
        for (q2, slot) in min_w[a].iter_mut().enumerate() {
            *slot = slot.min(own - real.eta_tilde(i, q2));
        }
        let eps = &real.epsilon[j];
        min_eps[a] = min_eps[a].min(eps[k]);
        for (k2, slot) in min_e[a].iter_mut().enumerate() {
            *slot = slot.min(eps[k] - eps[k2]);
        }
    }

    // Best unmatched agents per type.
    let mut free_eta = vec![vec![f64::NEG_INFINITY; qq]; kk];
    for &i in &m.unmatched_workers {
        let k = real.worker_type[i];
        for (q, slot) in free_eta[k].iter_mut().enumerate() {
            *slot = slot.max(real.eta_tilde(i, q));
        }
    }
    let mut free_eps = vec![vec![f64::NEG_INFINITY; kk]; qq];
    for &j in &m.unmatched_employers {
        let q = real.employer_type[j];
        for (k, slot) in free_eps[q].iter_mut().enumerate() {
            *slot = slot.max(real.epsilon[j][k]);
        }
    }

    let mut diff_edges = Vec::with_capacity(n * n.saturating_sub(1));
    for (a, &(_, q)) in nodes.iter().enumerate() {
        for (b, &(k2, _)) in nodes.iter().enumerate() {
            if a != b {
                // worker at b against employer at a
                diff_edges.push(DiffEdge {
                    from: a,
                    to: b,
                    bound: min_w[b][q] + min_e[a][k2],
                });
            }
        }
    }

    let mut lower_box = Vec::with_capacity(n);
    let mut upper_box = Vec::with_capacity(n);
    for (a, &(k, q)) in nodes.iter().enumerate() {
        let mut lo = -min_eps[a];
        for (k2, free) in free_eta.iter().enumerate() {
            if free[q].is_finite() {
                // unmatched worker of type k2 against employers at a
                lo = lo.max(free[q] - min_e[a][k2]);
            }
        }
        let mut hi = min_eta[a];
        for (q2, free) in free_eps.iter().enumerate() {
            if free[k].is_finite() {
                // unmatched employer of type q2 against workers at a
                hi = hi.min(min_w[a][q2] - free[k]);
            }
        }
        if lo > hi + TOLERANCE {
            return Err(Error::Inconsistency(format!(
                "empty price box [{lo}, {hi}] for type pair ({k}, {q})"
            )));
        }
        lower_box.push(lo);
        upper_box.push(hi);
    }

    Ok(ConstraintGraph {
        nodes,
        counts,
        diff_edges,
        lower_box,
        upper_box,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeBounds {
    pub k: usize,
    pub q: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub alpha_min: f64,
    pub alpha_max: f64,
}

impl NodeBounds {
    pub fn width(&self) -> f64 {
        self.alpha_max - self.alpha_min
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoreSize {
    pub value: f64,
    /// Set when the matching is empty and the size is zero by convention.
    pub empty_matching: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoreBounds {
    pub nodes: Vec<NodeBounds>,
    /// Core price vector attaining every `alpha_min` at once.
    pub witness_min: Vec<f64>,
    /// Core price vector attaining every `alpha_max` at once.
    pub witness_max: Vec<f64>,
    pub core_size: f64,
}

impl CoreBounds {
    pub fn alpha_min(&self) -> Vec<f64> {
        self.nodes.iter().map(|b| b.alpha_min).collect()
    }

    pub fn alpha_max(&self) -> Vec<f64> {
        self.nodes.iter().map(|b| b.alpha_max).collect()
    }
}

/// Shortest distances from node `src` over `n` nodes; `None` on a negative
/// cycle. Edges are (from, to, weight).
fn bellman_ford(n: usize, edges: &[(usize, usize, f64)], src: usize) -> Option<Vec<f64>> {
    let mut dist = vec![f64::INFINITY; n];
    dist[src] = 0.0;
    for _ in 0..n {
        let mut changed = false;
        for &(a, b, w) in edges {
            if dist[a] + w < dist[b] {
                dist[b] = dist[a] + w;
                changed = true;
            }
        }
        if !changed {
            return Some(dist);
        }
    }
    let cycle = edges.iter().any(|&(a, b, w)| dist[a] + w < dist[b] - TOLERANCE);
    (!cycle).then_some(dist)
}

/// Edge list over graph nodes plus the source at index `g.len()`.
fn source_edges(g: &ConstraintGraph) -> Vec<(usize, usize, f64)> {
    let s = g.len();
    let mut edges: Vec<(usize, usize, f64)> =
        g.diff_edges.iter().map(|e| (e.from, e.to, e.bound)).collect();
    for a in 0..s {
        if g.upper_box[a].is_finite() {
            edges.push((s, a, g.upper_box[a]));
        }
        if g.lower_box[a].is_finite() {
            edges.push((a, s, -g.lower_box[a]));
        }
    }
    edges
}

fn infeasible() -> Error {
    Error::Inconsistency("negative cycle: core price constraints are infeasible".into())
}

/// Per-node price extremes. `alpha_max` is the distance from a virtual
/// source and `alpha_min` minus the distance back to it; the two distance
/// vectors are themselves core prices.
pub fn core_bounds(g: &ConstraintGraph) -> Result<CoreBounds> {
    let s = g.len();
    let edges = source_edges(g);
    let up = bellman_ford(s + 1, &edges, s).ok_or_else(infeasible)?;
    let reversed: Vec<_> = edges.iter().map(|&(a, b, w)| (b, a, w)).collect();
    let down = bellman_ford(s + 1, &reversed, s).ok_or_else(infeasible)?;
    if up[s] < -TOLERANCE || down[s] < -TOLERANCE {
        return Err(infeasible());
    }
    let witness_max: Vec<f64> = up[..s].to_vec();
    let witness_min: Vec<f64> = down[..s].iter().map(|d| -d).collect();
    let mut nodes = Vec::with_capacity(s);
    for a in 0..s {
        if !(witness_max[a].is_finite() && witness_min[a].is_finite()) {
            return Err(Error::Inconsistency(format!(
                "unbounded price for type pair {:?}",
                g.nodes[a]
            )));
        }
        if witness_min[a] > witness_max[a] + TOLERANCE {
            return Err(infeasible());
        }
        nodes.push(NodeBounds {
            k: g.nodes[a].0,
            q: g.nodes[a].1,
            n: g.counts[a],
            alpha_min: witness_min[a],
            alpha_max: witness_max[a],
        });
    }
    let core_size = weighted_width(&nodes).unwrap_or(0.0);
    Ok(CoreBounds {
        nodes,
        witness_min,
        witness_max,
        core_size,
    })
}

fn weighted_width(nodes: &[NodeBounds]) -> Option<f64> {
    let total: usize = nodes.iter().map(|b| b.n).sum();
    (total > 0).then(|| nodes.iter().map(|b| b.n as f64 * b.width()).sum::<f64>() / total as f64)
}

/// N-weighted mean price range. Zero, flagged, for an empty matching.
pub fn core_size(b: &CoreBounds, m: &Matching) -> CoreSize {
    let nodes: Vec<NodeBounds> = b
        .nodes
        .iter()
        .map(|nb| NodeBounds {
            n: m.pair_counts[nb.k][nb.q],
            ..nb.clone()
        })
        .collect();
    match weighted_width(&nodes) {
        Some(value) => CoreSize {
            value,
            empty_matching: false,
        },
        None => CoreSize {
            value: 0.0,
            empty_matching: true,
        },
    }
}

/// Greatest core price vector that is coordinatewise at most `target`.
pub fn project_below(g: &ConstraintGraph, target: &[f64]) -> Result<Vec<f64>> {
    let s = g.len();
    let mut edges = source_edges(g);
    edges.extend(target.iter().enumerate().map(|(a, &t)| (s, a, t)));
    let dist = bellman_ford(s + 1, &edges, s).ok_or_else(infeasible)?;
    if dist[s] < -TOLERANCE {
        return Err(Error::Inconsistency(format!(
            "no core price vector lies below the target (slack {})",
            dist[s]
        )));
    }
    Ok(dist[..s].to_vec())
}

/// Coordinatewise midpoint of the price ranges, projected into the core.
pub fn feasible_midpoint(g: &ConstraintGraph, b: &CoreBounds) -> Result<Vec<f64>> {
    let mid: Vec<f64> = b
        .witness_min
        .iter()
        .zip(&b.witness_max)
        .map(|(lo, hi)| 0.5 * (lo + hi))
        .collect();
    project_below(g, &mid)
}

/// Range `[lo, hi]` of `theta` such that adding `theta` to the coordinates
/// flagged in `shifted` keeps the feasible vector `base` feasible.
pub fn shift_interval(g: &ConstraintGraph, base: &[f64], shifted: &[bool]) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for e in &g.diff_edges {
        let slack = e.bound - (base[e.to] - base[e.from]);
        match (shifted[e.from], shifted[e.to]) {
            (false, true) => hi = hi.min(slack),
            (true, false) => lo = lo.max(-slack),
            _ => {}
        }
    }
    for (a, &x) in base.iter().enumerate() {
        if shifted[a] {
            lo = lo.max(g.lower_box[a] - x);
            hi = hi.min(g.upper_box[a] - x);
        }
    }
    (lo, hi)
}
