use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::market::MarketRealization;
use crate::matching::Matching;

/// Bipartite graph on types with an edge wherever N(k, q) > 0. A type is
/// marked when one of its agents is unmatched.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeAdjacencyGraph {
    pub worker_types: usize,
    pub employer_types: usize,
    pub edges: Vec<(usize, usize)>,
    pub worker_marked: Vec<bool>,
    pub employer_marked: Vec<bool>,
    /// Distance to the nearest marked type; `None` when the component has
    /// no marked type.
    pub worker_distance: Vec<Option<usize>>,
    pub employer_distance: Vec<Option<usize>>,
    /// Connected components without any marked type.
    pub unmarked_components: usize,
}

pub fn type_adjacency_graph(real: &MarketRealization, m: &Matching) -> TypeAdjacencyGraph {
    let (kk, qq) = (real.worker_types(), real.employer_types());
    // vertices: worker types 0..K, employer types K..K+Q
    let total = kk + qq;
    let mut adj = vec![Vec::new(); total];
    let mut edges = Vec::new();
    for k in 0..kk {
        for q in 0..qq {
            if m.pair_counts[k][q] > 0 {
                edges.push((k, q));
                adj[k].push(kk + q);
                adj[kk + q].push(k);
            }
        }
    }
    let mut marked = vec![false; total];
    for &i in &m.unmatched_workers {
        marked[real.worker_type[i]] = true;
    }
    for &j in &m.unmatched_employers {
        marked[kk + real.employer_type[j]] = true;
    }

    let mut dist: Vec<Option<usize>> = vec![None; total];
    let mut queue = VecDeque::new();
    for v in 0..total {
        if marked[v] {
            dist[v] = Some(0);
            queue.push_back(v);
        }
    }
    while let Some(v) = queue.pop_front() {
        let d = dist[v].expect("queued vertices have a distance");
        for &w in &adj[v] {
            if dist[w].is_none() {
                dist[w] = Some(d + 1);
                queue.push_back(w);
            }
        }
    }

    // BFS reaches every vertex of a component that holds a mark.
    let mut seen = vec![false; total];
    let mut unmarked_components = 0;
    for start in 0..total {
        if seen[start] {
            continue;
        }
        let mut has_mark = false;
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(v) = stack.pop() {
            has_mark |= marked[v];
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        if !has_mark {
            unmarked_components += 1;
        }
    }

    TypeAdjacencyGraph {
        worker_types: kk,
        employer_types: qq,
        edges,
        worker_marked: marked[..kk].to_vec(),
        employer_marked: marked[kk..].to_vec(),
        worker_distance: dist[..kk].to_vec(),
        employer_distance: dist[kk..].to_vec(),
        unmarked_components,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{check_assumption_no_balanced_submarket, sample_market, MarketConfig};
    use crate::matching::max_weight_matching;

    #[test]
    fn unbalanced_one_type_market() {
        let real = sample_market(&MarketConfig::new(vec![1], vec![2], vec![vec![1.0]])).unwrap();
        let g = type_adjacency_graph(&real, &max_weight_matching(&real));
        assert_eq!(g.edges, vec![(0, 0)]);
        assert_eq!(g.worker_marked, vec![false]);
        assert_eq!(g.employer_marked, vec![true]);
        assert_eq!(g.worker_distance, vec![Some(1)]);
        assert_eq!(g.employer_distance, vec![Some(0)]);
        assert_eq!(g.unmarked_components, 0);
    }

    #[test]
    fn balanced_market_has_unmarked_component() {
        let real = sample_market(&MarketConfig::new(vec![3], vec![3], vec![vec![1.0]])).unwrap();
        let g = type_adjacency_graph(&real, &max_weight_matching(&real));
        assert_eq!(g.unmarked_components, 1);
        assert_eq!(g.worker_distance, vec![None]);
    }

    #[test]
    fn random_unbalanced_markets_always_have_marks() {
        let mut checked = 0;
        for seed in 0..500u64 {
            let w = vec![5 + (seed % 4) as usize, 7];
            let e = vec![6, 9 + (seed % 3) as usize];
            let cfg = MarketConfig::new(w, e, vec![vec![1.0, 0.5], vec![0.5, 1.0]]).with_seed(seed);
            if !check_assumption_no_balanced_submarket(&cfg).unwrap().holds {
                continue;
            }
            checked += 1;
            let real = sample_market(&cfg).unwrap();
            let g = type_adjacency_graph(&real, &max_weight_matching(&real));
            assert_eq!(g.unmarked_components, 0, "seed {seed}");
            let max_d = g.worker_distance.iter().chain(&g.employer_distance).flatten().max();
            assert!(max_d.copied().unwrap_or(0) <= 4);
        }
        assert!(checked > 100);
    }
}
