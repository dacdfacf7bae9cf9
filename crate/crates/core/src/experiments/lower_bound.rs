//! Markets where the core stays wide: one cheap worker type competes with
//! `K - 1` valuable ones for a single employer type with exactly one
//! employer too many to absorb the valuable workers.

use serde::{Deserialize, Serialize};

use super::{flag, frequency, lemma1_applies, market_trial, run_cells, Cell, ExperimentReport};
use crate::corepoly::{feasible_midpoint, shift_interval};
use crate::error::{Error, Result};
use crate::market::MarketConfig;

/// Worker type whose pairs are held fixed.
const ANCHOR_TYPE: usize = 0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LowerBoundConfig {
    pub k: usize,
    pub n_tilde_grid: Vec<usize>,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for LowerBoundConfig {
    fn default() -> Self {
        LowerBoundConfig {
            k: 2,
            n_tilde_grid: vec![50, 100, 200, 400, 800],
            trials: 200,
            seed: 2,
        }
    }
}

/// `K` worker types of `n_tilde` workers, one employer type with
/// `(K-1) n_tilde + 1` employers; type 0 has value 0 and the others 3.
pub fn make_lower_bound_market(k: usize, n_tilde: usize) -> Result<MarketConfig> {
    if k < 2 || n_tilde < 1 {
        return Err(Error::Config(format!(
            "lower-bound market needs k >= 2 and n_tilde >= 1, got k={k}, n_tilde={n_tilde}"
        )));
    }
    let u = (0..k)
        .map(|t| vec![if t == ANCHOR_TYPE { 0.0 } else { 3.0 }])
        .collect();
    Ok(MarketConfig::new(vec![n_tilde; k], vec![(k - 1) * n_tilde + 1], u))
}

/// Exactly one value lies in `[-1, -1 + h]` and none in `(-1 + h, -1 + 2h]`,
/// with `h = n_tilde^(-1/k)`.
pub fn event_b(xs: &[f64], n_tilde: usize, k: usize) -> bool {
    let h = (n_tilde as f64).powf(-1.0 / k as f64);
    let low = xs.iter().filter(|&&x| x <= -1.0 + h).count();
    let next = xs.iter().filter(|&&x| x > -1.0 + h && x <= -1.0 + 2.0 * h).count();
    low == 1 && next == 0
}

pub fn lower_bound_experiment(cfg: &LowerBoundConfig, workers: usize) -> Result<ExperimentReport> {
    if cfg.n_tilde_grid.is_empty() {
        return Err(Error::Config("n_tilde_grid is empty".into()));
    }
    let k = cfg.k;
    let configs = cfg
        .n_tilde_grid
        .iter()
        .map(|&nt| Ok((nt, make_lower_bound_market(k, nt)?)))
        .collect::<Result<Vec<_>>>()?;
    let cells = configs
        .iter()
        .map(|(nt, mc)| {
            let nt = *nt;
            let audit = lemma1_applies(mc)?;
            let n = mc.n();
            let h = (nt as f64).powf(-1.0 / k as f64);
            let delta = (n as f64).powf(-0.51);
            Ok(Cell {
                label: format!("n_tilde={nt}"),
                n,
                run: Box::new(move |s| {
                    market_trial(mc, s, audit, |real, sol, diag| {
                        let xs: Vec<f64> = real
                            .epsilon
                            .iter()
                            .map(|e| {
                                let best_other = (0..k)
                                    .filter(|&t| t != ANCHOR_TYPE)
                                    .map(|t| e[t])
                                    .fold(f64::NEG_INFINITY, f64::max);
                                best_other - e[ANCHOR_TYPE]
                            })
                            .collect();
                        let ev = event_b(&xs, nt, k);
                        let g = &sol.graph;
                        let shifted: Vec<bool> = g.nodes.iter().map(|&(t, _)| t != ANCHOR_TYPE).collect();
                        let mid = feasible_midpoint(g, &sol.bounds)?;
                        let width = [&sol.bounds.witness_min, &sol.bounds.witness_max, &mid]
                            .into_iter()
                            .map(|base| {
                                let (lo, hi) = shift_interval(g, base, &shifted);
                                hi - lo
                            })
                            .fold(f64::INFINITY, f64::min);
                        diag.insert("event_b".into(), flag(ev));
                        diag.insert("theta_width".into(), width);
                        diag.insert("h".into(), h);
                        diag.insert("delta".into(), delta);
                        if ev {
                            diag.insert("width_ok".into(), flag(width >= h - 2.0 * delta));
                        }
                        Ok(())
                    })
                }),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let params = serde_json::to_value(cfg).expect("config serializes");
    let mut report = run_cells("lowerbound", params, &cells, cfg.trials, cfg.seed, workers)?;
    if let Some(f) = frequency(&report.trials, "event_b") {
        report.frequencies.insert("event_b".into(), f);
    }
    if let Some(f) = frequency(&report.trials, "width_ok") {
        report.frequencies.insert("width_ok_given_event_b".into(), f);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn market_construction() {
        let m = make_lower_bound_market(2, 3).unwrap();
        assert_eq!(m.worker_counts, vec![3, 3]);
        assert_eq!(m.employer_counts, vec![4]);
        assert_eq!(m.u, vec![vec![0.0], vec![3.0]]);
        assert_eq!(make_lower_bound_market(3, 2).unwrap().employer_counts, vec![5]);
        let m = make_lower_bound_market(2, 1).unwrap();
        assert_eq!((m.worker_counts, m.employer_counts), (vec![1, 1], vec![2]));
        assert!(make_lower_bound_market(1, 4).is_err());
    }

    #[test]
    fn event_membership() {
        assert!(event_b(&[-0.9, -0.3, 0.2], 16, 2));
        assert!(!event_b(&[-0.9, -0.8], 16, 2));
        assert!(!event_b(&[-0.9, -0.6], 16, 2));
        assert!(!event_b(&[0.1, 0.2], 16, 2));
    }

    #[test]
    fn small_run_reports_frequencies() {
        let cfg = LowerBoundConfig {
            k: 2,
            n_tilde_grid: vec![10, 20],
            trials: 8,
            seed: 5,
        };
        let r = lower_bound_experiment(&cfg, 2).unwrap();
        assert_eq!(r.rows.len(), 2);
        assert!(r.fit.is_some());
        assert!(r.frequencies.contains_key("event_b"));
        assert_eq!(r.lemma1.trials_with_unmarked_component, 0);
        assert_eq!(r.lemma1.trials_audited, 16);
    }
}
