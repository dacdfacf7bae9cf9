use serde::{Deserialize, Serialize};

use super::{lemma1_applies, market_trial, run_cells, Cell, ExperimentReport};
use crate::error::{Error, Result};
use crate::market::{Distribution, MarketConfig};

/// Market family indexed by size: type `t` gets `round(share[t] * n)`
/// agents (at least one).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingConfig {
    pub worker_shares: Vec<f64>,
    pub employer_shares: Vec<f64>,
    pub u: Vec<Vec<f64>>,
    #[serde(default)]
    pub distribution: Distribution,
    pub n_grid: Vec<usize>,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        ScalingConfig {
            worker_shares: vec![0.26, 0.34],
            employer_shares: vec![0.18, 0.22],
            u: vec![vec![1.0, 0.5], vec![0.5, 1.0]],
            distribution: Distribution::Uniform01,
            n_grid: vec![200, 400, 800, 1600],
            trials: 100,
            seed: 1,
        }
    }
}

impl ScalingConfig {
    pub fn config_at(&self, n: usize) -> Result<MarketConfig> {
        let counts = |shares: &[f64]| -> Result<Vec<usize>> {
            shares
                .iter()
                .map(|&s| {
                    if s.is_finite() && s > 0.0 {
                        Ok(((s * n as f64).round() as usize).max(1))
                    } else {
                        Err(Error::Config(format!("type shares must be positive, got {s}")))
                    }
                })
                .collect()
        };
        let config = MarketConfig::new(counts(&self.worker_shares)?, counts(&self.employer_shares)?, self.u.clone())
            .with_distribution(self.distribution);
        config.validate()?;
        Ok(config)
    }
}

/// Mean core size over `trials` markets at each grid size.
pub fn run_trials(cfg: &ScalingConfig, workers: usize) -> Result<ExperimentReport> {
    if cfg.n_grid.is_empty() {
        return Err(Error::Config("n_grid is empty".into()));
    }
    let configs = cfg
        .n_grid
        .iter()
        .map(|&n| cfg.config_at(n))
        .collect::<Result<Vec<_>>>()?;
    let cells = configs
        .iter()
        .map(|mc| {
            let audit = lemma1_applies(mc)?;
            Ok(Cell {
                label: format!("n={}", mc.n()),
                n: mc.n(),
                run: Box::new(move |s| market_trial(mc, s, audit, |_, _, _| Ok(()))),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let params = serde_json::to_value(cfg).expect("config serializes");
    run_cells("scaling", params, &cells, cfg.trials, cfg.seed, workers)
}
