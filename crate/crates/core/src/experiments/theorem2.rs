//! Several worker types against one employer type with `m` surplus
//! employers.

use serde::{Deserialize, Serialize};

use super::{flag, frequency, lemma1_applies, market_trial, run_cells, Cell, ExperimentReport};
use crate::error::{Error, Result};
use crate::market::MarketConfig;
use crate::TOLERANCE;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Imbalance {
    /// `m = ceil(fraction * n)`.
    Proportional { fraction: f64 },
    Fixed { m: usize },
}

impl Imbalance {
    fn surplus(&self, n: usize) -> usize {
        match *self {
            Imbalance::Proportional { fraction } => (fraction * n as f64).ceil() as usize,
            Imbalance::Fixed { m } => m,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Theorem2Config {
    pub k: usize,
    /// `u[k]` against the single employer type; must be non-negative.
    pub u: Vec<f64>,
    pub n_grid: Vec<usize>,
    pub imbalance: Imbalance,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for Theorem2Config {
    fn default() -> Self {
        Theorem2Config {
            k: 2,
            u: vec![1.0, 1.0],
            n_grid: vec![200, 400, 800, 1600, 3200],
            imbalance: Imbalance::Proportional { fraction: 0.25 },
            trials: 200,
            seed: 3,
        }
    }
}

impl Theorem2Config {
    /// `n_E - n_L = m` with `n_L = floor((n - m) / 2)`, workers split evenly
    /// across types.
    pub fn config_at(&self, n: usize) -> Result<MarketConfig> {
        if self.k < 2 {
            return Err(Error::Config(format!("need k >= 2 worker types, got {}", self.k)));
        }
        if self.u.len() != self.k || self.u.iter().any(|&v| !(v >= 0.0)) {
            return Err(Error::Config(format!(
                "u must list {} non-negative values",
                self.k
            )));
        }
        let m = self.imbalance.surplus(n);
        if m < 1 || m >= n {
            return Err(Error::Config(format!("surplus m={m} must lie in [1, n) for n={n}")));
        }
        let n_l = (n - m) / 2;
        if n_l < self.k {
            return Err(Error::Config(format!("n={n} leaves fewer workers than types")));
        }
        let workers = (0..self.k)
            .map(|t| n_l / self.k + usize::from(t < n_l % self.k))
            .collect();
        let config = MarketConfig::new(workers, vec![n_l + m], self.u.iter().map(|&v| vec![v]).collect());
        config.validate()?;
        Ok(config)
    }
}

pub fn theorem2_experiment(cfg: &Theorem2Config, workers: usize) -> Result<ExperimentReport> {
    if cfg.n_grid.is_empty() {
        return Err(Error::Config("n_grid is empty".into()));
    }
    let configs = cfg
        .n_grid
        .iter()
        .map(|&n| cfg.config_at(n))
        .collect::<Result<Vec<_>>>()?;
    let kk = cfg.k;
    let cells = configs
        .iter()
        .map(|mc| {
            let audit = lemma1_applies(mc)?;
            Ok(Cell {
                label: format!("n={}", mc.n()),
                n: mc.n(),
                run: Box::new(move |s| {
                    market_trial(mc, s, audit, |real, sol, diag| {
                        let m = &sol.matching;
                        let mut z = vec![f64::INFINITY; kk];
                        for &(i, j) in &m.pairs {
                            let t = real.worker_type[i];
                            z[t] = z[t].min(real.epsilon[j][t]);
                        }
                        let mut u = vec![f64::NEG_INFINITY; kk];
                        for &j in &m.unmatched_employers {
                            for (t, slot) in u.iter_mut().enumerate() {
                                *slot = slot.max(real.epsilon[j][t]);
                            }
                        }
                        for t in 0..kk {
                            if z[t].is_finite() {
                                diag.insert(format!("z_{t}"), z[t]);
                            }
                            if u[t].is_finite() {
                                diag.insert(format!("u_{t}"), u[t]);
                            }
                        }
                        let applicable = z.iter().all(|v| v.is_finite()) && !m.unmatched_employers.is_empty();
                        if applicable {
                            let gap = (0..kk).map(|t| z[t] - u[t]).fold(f64::INFINITY, f64::min);
                            diag.insert("min_gap".into(), gap);
                            diag.insert(
                                "gap_bound_holds".into(),
                                flag(sol.bounds.core_size <= gap + TOLERANCE),
                            );
                            // the narrowest type's range obeys the same bound
                            let min_width = sol
                                .bounds
                                .nodes
                                .iter()
                                .map(|b| b.width())
                                .fold(f64::INFINITY, f64::min);
                            diag.insert("min_width".into(), min_width);
                            diag.insert("min_width_bound_holds".into(), flag(min_width <= gap + TOLERANCE));
                        }
                        Ok(())
                    })
                }),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let params = serde_json::to_value(cfg).expect("config serializes");
    let mut report = run_cells("theorem2", params, &cells, cfg.trials, cfg.seed, workers)?;
    for key in ["gap_bound_holds", "min_width_bound_holds"] {
        if let Some(f) = frequency(&report.trials, key) {
            report.frequencies.insert(key.into(), f);
        }
    }
    Ok(report)
}
