//! Successive shortest paths on a type-compressed network.
//!
//! The flow network is `S -> worker -> hub(k,q) -> employer -> T` with cost
//! `-eta_tilde[i][q]` on worker arcs and `-epsilon[j][k]` on employer arcs.
//! Every augmenting path only passes through agents between two hubs, so
//! the residual graph collapses to `K*Q + 2` nodes whose arc costs are
//! minima over ordered sets of agents. Each augmentation runs Bellman-Ford
//! on that small graph and moves at most one agent per hop.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use crate::market::MarketRealization;

/// Relaxations must improve by more than this, which keeps rounding noise
/// from creating predecessor cycles.
const RELAX_EPS: f64 = 1e-13;

#[derive(Debug, Clone, Copy)]
struct Key(f64, usize);

impl PartialEq for Key {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Key {}
impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

#[derive(Debug, Clone, Copy)]
enum Hop {
    /// Unmatched worker enters hub.
    Source(usize),
    /// Matched worker moves to the hub being relaxed.
    Worker(usize),
    /// Matched employer moves to the hub being relaxed from.
    Employer(usize),
    /// Unmatched employer leaves through T.
    Sink(usize),
}

struct Network<'a> {
    real: &'a MarketRealization,
    kk: usize,
    qq: usize,
    /// Hub of each worker/employer, if matched.
    worker_hub: Vec<Option<usize>>,
    employer_hub: Vec<Option<usize>>,
    /// free_w[k*Q+q]: unmatched workers of type k keyed by -eta_tilde[i][q].
    free_w: Vec<BTreeSet<Key>>,
    /// moved_w[(k*Q+q0)*Q+q1]: workers at hub (k,q0) keyed by
    /// eta_tilde[i][q0] - eta_tilde[i][q1].
    moved_w: Vec<BTreeSet<Key>>,
    /// free_e[q*K+k]: unmatched employers of type q keyed by -epsilon[j][k].
    free_e: Vec<BTreeSet<Key>>,
    /// moved_e[(q*K+k0)*K+k]: employers at hub (k0,q) keyed by
    /// epsilon[j][k0] - epsilon[j][k].
    moved_e: Vec<BTreeSet<Key>>,
}

impl<'a> Network<'a> {
    fn new(real: &'a MarketRealization) -> Self {
        let (kk, qq) = (real.worker_types(), real.employer_types());
        let mut net = Network {
            real,
            kk,
            qq,
            worker_hub: vec![None; real.n_workers()],
            employer_hub: vec![None; real.n_employers()],
            free_w: vec![BTreeSet::new(); kk * qq],
            moved_w: vec![BTreeSet::new(); kk * qq * qq],
            free_e: vec![BTreeSet::new(); kk * qq],
            moved_e: vec![BTreeSet::new(); kk * kk * qq],
        };
        for i in 0..real.n_workers() {
            net.insert_free_worker(i);
        }
        for j in 0..real.n_employers() {
            net.insert_free_employer(j);
        }
        net
    }

    fn hub(&self, k: usize, q: usize) -> usize {
        k * self.qq + q
    }

    fn free_worker_keys(&self, i: usize) -> impl Iterator<Item = (usize, Key)> + '_ {
        let k = self.real.worker_type[i];
        (0..self.qq).map(move |q| (k * self.qq + q, Key(-self.real.eta_tilde(i, q), i)))
    }

    fn insert_free_worker(&mut self, i: usize) {
        let keys: Vec<_> = self.free_worker_keys(i).collect();
        for (slot, key) in keys {
            self.free_w[slot].insert(key);
        }
    }

    fn remove_free_worker(&mut self, i: usize) {
        let keys: Vec<_> = self.free_worker_keys(i).collect();
        for (slot, key) in keys {
            self.free_w[slot].remove(&key);
        }
    }

    fn moved_worker_keys(&self, i: usize, q0: usize) -> Vec<(usize, Key)> {
        let k = self.real.worker_type[i];
        let base = self.real.eta_tilde(i, q0);
        (0..self.qq)
            .filter(|&q1| q1 != q0)
            .map(|q1| ((self.hub(k, q0)) * self.qq + q1, Key(base - self.real.eta_tilde(i, q1), i)))
            .collect()
    }

    fn set_worker_hub(&mut self, i: usize, q: usize) {
        let k = self.real.worker_type[i];
        match self.worker_hub[i] {
            None => self.remove_free_worker(i),
            Some(h) => {
                for (slot, key) in self.moved_worker_keys(i, h % self.qq) {
                    self.moved_w[slot].remove(&key);
                }
            }
        }
        for (slot, key) in self.moved_worker_keys(i, q) {
            self.moved_w[slot].insert(key);
        }
        self.worker_hub[i] = Some(self.hub(k, q));
    }

    fn free_employer_keys(&self, j: usize) -> impl Iterator<Item = (usize, Key)> + '_ {
        let q = self.real.employer_type[j];
        (0..self.kk).map(move |k| (q * self.kk + k, Key(-self.real.epsilon[j][k], j)))
    }

    fn insert_free_employer(&mut self, j: usize) {
        let keys: Vec<_> = self.free_employer_keys(j).collect();
        for (slot, key) in keys {
            self.free_e[slot].insert(key);
        }
    }

    fn remove_free_employer(&mut self, j: usize) {
        let keys: Vec<_> = self.free_employer_keys(j).collect();
        for (slot, key) in keys {
            self.free_e[slot].remove(&key);
        }
    }

    fn moved_employer_keys(&self, j: usize, k0: usize) -> Vec<(usize, Key)> {
        let q = self.real.employer_type[j];
        let eps = &self.real.epsilon[j];
        (0..self.kk)
            .filter(|&k| k != k0)
            .map(|k| ((q * self.kk + k0) * self.kk + k, Key(eps[k0] - eps[k], j)))
            .collect()
    }

    fn set_employer_hub(&mut self, j: usize, k: usize) {
        let q = self.real.employer_type[j];
        match self.employer_hub[j] {
            None => self.remove_free_employer(j),
            Some(h) => {
                for (slot, key) in self.moved_employer_keys(j, h / self.qq) {
                    self.moved_e[slot].remove(&key);
                }
            }
        }
        for (slot, key) in self.moved_employer_keys(j, k) {
            self.moved_e[slot].insert(key);
        }
        self.employer_hub[j] = Some(self.hub(k, q));
    }

    /// Arcs of the compressed residual graph as (from, to, cost, hop).
    /// Node 0 is S, node `1 + hub` a hub, node `1 + K*Q` is T.
    fn arcs(&self) -> Vec<(usize, usize, f64, Hop)> {
        let (kk, qq) = (self.kk, self.qq);
        let t = 1 + kk * qq;
        let mut arcs = Vec::new();
        for k in 0..kk {
            for q in 0..qq {
                let h = self.hub(k, q);
                if let Some(key) = self.free_w[h].first() {
                    arcs.push((0, 1 + h, key.0, Hop::Source(key.1)));
                }
                if let Some(key) = self.free_e[q * kk + k].first() {
                    arcs.push((1 + h, t, key.0, Hop::Sink(key.1)));
                }
                for q1 in (0..qq).filter(|&q1| q1 != q) {
                    if let Some(key) = self.moved_w[h * qq + q1].first() {
                        arcs.push((1 + h, 1 + self.hub(k, q1), key.0, Hop::Worker(key.1)));
                    }
                }
                // Employer j at hub (k0,q) is taken over by hub (k,q).
                for k0 in (0..kk).filter(|&k0| k0 != k) {
                    if let Some(key) = self.moved_e[(q * kk + k0) * kk + k].first() {
                        arcs.push((1 + h, 1 + self.hub(k0, q), key.0, Hop::Employer(key.1)));
                    }
                }
            }
        }
        arcs
    }

    /// Finds a shortest S-T path and applies it if its cost is negative.
    fn augment(&mut self) -> bool {
        let nodes = 2 + self.kk * self.qq;
        let t = nodes - 1;
        let arcs = self.arcs();
        let mut dist = vec![f64::INFINITY; nodes];
        let mut pred: Vec<Option<usize>> = vec![None; nodes];
        dist[0] = 0.0;
        for _ in 0..nodes {
            let mut changed = false;
            for (idx, &(a, b, w, _)) in arcs.iter().enumerate() {
                if dist[a].is_finite() && dist[a] + w < dist[b] - RELAX_EPS {
                    dist[b] = dist[a] + w;
                    pred[b] = Some(idx);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        if !(dist[t] < 0.0) {
            return false;
        }
        let mut path = Vec::new();
        let mut node = t;
        while node != 0 {
            let idx = pred[node].expect("reachable node has a predecessor");
            path.push(arcs[idx]);
            node = arcs[idx].0;
            assert!(path.len() <= nodes, "predecessor cycle in residual graph");
        }
        for (from, to, _, hop) in path {
            match hop {
                Hop::Source(i) => {
                    let h = to - 1;
                    self.set_worker_hub(i, h % self.qq);
                }
                Hop::Worker(i) => {
                    let h = to - 1;
                    self.set_worker_hub(i, h % self.qq);
                }
                Hop::Employer(j) => {
                    let h = from - 1;
                    self.set_employer_hub(j, h / self.qq);
                }
                Hop::Sink(j) => {
                    let h = from - 1;
                    self.set_employer_hub(j, h / self.qq);
                }
            }
        }
        true
    }

    fn into_pairs(self) -> Vec<(usize, usize)> {
        let hubs = self.kk * self.qq;
        let mut workers = vec![Vec::new(); hubs];
        let mut employers = vec![Vec::new(); hubs];
        for (i, h) in self.worker_hub.iter().enumerate() {
            if let Some(h) = h {
                workers[*h].push(i);
            }
        }
        for (j, h) in self.employer_hub.iter().enumerate() {
            if let Some(h) = h {
                employers[*h].push(j);
            }
        }
        workers
            .into_iter()
            .zip(employers)
            .flat_map(|(w, e)| {
                debug_assert_eq!(w.len(), e.len());
                w.into_iter().zip(e)
            })
            .collect()
    }
}

pub(super) fn solve(real: &MarketRealization) -> Vec<(usize, usize)> {
    let mut net = Network::new(real);
    while net.augment() {}
    net.into_pairs()
}
