//! Frequencies of the hypercube gap events on uniform clouds, and the
//! per-type price-range audit on full markets.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{flag, frequency, lemma1_applies, market_trial, run_cells, Attempt, Cell, ExperimentReport};
use crate::corepoly::audit_upper_bound_lemmas;
use crate::error::{Error, Result};
use crate::geometry::{event_indicators, region_statistics, PointCloud};
use crate::market::MarketConfig;
use crate::rng::{stream_rng, ROLE_CLOUD};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaRule {
    /// `n^(-1/D)`.
    InverseDim,
    /// `n^(-exponent)`.
    Power { exponent: f64 },
    Fixed { value: f64 },
}

impl DeltaRule {
    pub fn delta(&self, n: usize, d: usize) -> f64 {
        match *self {
            DeltaRule::InverseDim => (n as f64).powf(-1.0 / d as f64),
            DeltaRule::Power { exponent } => (n as f64).powf(-exponent),
            DeltaRule::Fixed { value } => value,
        }
    }

    fn label(&self) -> String {
        match *self {
            DeltaRule::InverseDim => "n^-1/D".into(),
            DeltaRule::Power { exponent } => format!("n^-{exponent}"),
            DeltaRule::Fixed { value } => format!("{value}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmaMarketConfig {
    pub worker_counts: Vec<usize>,
    pub employer_counts: Vec<usize>,
    pub u: Vec<Vec<f64>>,
    /// Audit delta as a function of the total market size.
    pub delta: DeltaRule,
}

impl Default for LemmaMarketConfig {
    fn default() -> Self {
        LemmaMarketConfig {
            worker_counts: vec![130, 170],
            employer_counts: vec![110, 150],
            u: vec![vec![1.0, 0.5], vec![0.5, 1.0]],
            delta: DeltaRule::Power { exponent: 0.5 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmasConfig {
    pub n_grid: Vec<usize>,
    pub dims: Vec<usize>,
    pub delta_rules: Vec<DeltaRule>,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub market: Option<LemmaMarketConfig>,
}

impl Default for LemmasConfig {
    fn default() -> Self {
        LemmasConfig {
            n_grid: vec![10_000],
            dims: vec![2, 3],
            delta_rules: vec![
                DeltaRule::InverseDim,
                DeltaRule::Fixed { value: 0.5 },
                DeltaRule::Power { exponent: 0.49 },
            ],
            trials: 200,
            seed: 4,
            market: Some(LemmaMarketConfig::default()),
        }
    }
}

fn cloud_trial(n: usize, d: usize, delta: f64, seed: u64) -> Result<Attempt> {
    let mut rng = stream_rng(seed, &[ROLE_CLOUD]);
    let points = (0..n)
        .map(|_| (0..d).map(|_| rng.random::<f64>()).collect())
        .collect();
    let stats = region_statistics(&PointCloud::new(d, points)?, delta)?;
    let ev = event_indicators(&stats, n, d, delta)?;
    let mut diag = BTreeMap::new();
    diag.insert("delta".into(), delta);
    diag.insert("b1".into(), flag(ev.b1));
    diag.insert("b2".into(), flag(ev.b2));
    diag.insert("b3".into(), flag(ev.b3));
    diag.insert("b1_and_b2".into(), flag(ev.b1 && ev.b2));
    diag.insert("max_v".into(), stats.max_v());
    diag.insert("max_vtilde".into(), stats.max_vtilde());
    if let Some(&c) = stats.npair.iter().min() {
        diag.insert("min_npair".into(), c as f64);
    }
    Ok(Attempt::Done {
        core_size: None,
        diagnostics: diag,
    })
}

pub fn lemma_audit_experiment(cfg: &LemmasConfig, workers: usize) -> Result<ExperimentReport> {
    let market_config = cfg
        .market
        .as_ref()
        .map(|m| -> Result<(MarketConfig, DeltaRule)> {
            let mc = MarketConfig::new(m.worker_counts.clone(), m.employer_counts.clone(), m.u.clone());
            mc.validate()?;
            Ok((mc, m.delta))
        })
        .transpose()?;
    let mut cells = Vec::new();
    for &n in &cfg.n_grid {
        if n < 2 {
            return Err(Error::Config(format!("cloud size must be at least 2, got {n}")));
        }
        for &d in &cfg.dims {
            if d == 0 {
                return Err(Error::Config("cloud dimension must be positive".into()));
            }
            for rule in &cfg.delta_rules {
                let delta = rule.delta(n, d);
                if !(0.0..=1.0).contains(&delta) || delta == 0.0 {
                    return Err(Error::Config(format!("delta rule gives {delta} outside (0, 1]")));
                }
                cells.push(Cell {
                    label: format!("cloud n={n} D={d} delta={}", rule.label()),
                    n,
                    run: Box::new(move |s| cloud_trial(n, d, delta, s)),
                });
            }
        }
    }
    let cloud_cells = cells.len();

    if let Some((mc, rule)) = &market_config {
        let audit = lemma1_applies(mc)?;
        let n = mc.n();
        let delta = rule.delta(n, 1).min(0.5);
        cells.push(Cell {
            label: "market".into(),
            n,
            run: Box::new(move |s| {
                market_trial(mc, s, audit, |real, sol, diag| {
                    let a = audit_upper_bound_lemmas(real, &sol.matching, &sol.bounds, delta)?;
                    let all_events = a
                        .types
                        .iter()
                        .all(|t| t.events.is_some_and(|e| e.b1 && e.b2));
                    diag.insert("delta".into(), delta);
                    diag.insert("all_types_b1_and_b2".into(), flag(all_events));
                    diag.insert("bound_checks".into(), a.checked() as f64);
                    diag.insert("bound_violations".into(), a.violations as f64);
                    Ok(())
                })
            }),
        });
    }

    let params = serde_json::to_value(cfg).expect("config serializes");
    let mut report = run_cells("lemmas", params, &cells, cfg.trials, cfg.seed, workers)?;
    let trials = cfg.trials;
    for (g, row) in report.rows.iter().enumerate() {
        let slice = &report.trials[g * trials..(g + 1) * trials];
        let keys: &[&str] = if g < cloud_cells {
            &["b1", "b2", "b3", "b1_and_b2"]
        } else {
            &["all_types_b1_and_b2"]
        };
        for key in keys {
            if let Some(f) = frequency(slice, key) {
                report.frequencies.insert(format!("{} {key}", row.label), f);
            }
        }
        if g >= cloud_cells {
            let violations: f64 = slice
                .iter()
                .filter_map(|t| t.diagnostics.get("bound_violations"))
                .sum();
            let checks: f64 = slice.iter().filter_map(|t| t.diagnostics.get("bound_checks")).sum();
            report.frequencies.insert("market bound_checks_total".into(), checks);
            report.frequencies.insert("market bound_violations_total".into(), violations);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_rules() {
        assert!((DeltaRule::InverseDim.delta(10_000, 2) - 0.01).abs() < 1e-15);
        assert!((DeltaRule::Power { exponent: 0.5 }.delta(400, 3) - 0.05).abs() < 1e-15);
        assert_eq!(DeltaRule::Fixed { value: 0.5 }.delta(7, 2), 0.5);
    }

    #[test]
    fn small_audit_run() {
        let cfg = LemmasConfig {
            n_grid: vec![500],
            dims: vec![2],
            delta_rules: vec![DeltaRule::Fixed { value: 0.5 }],
            trials: 4,
            seed: 1,
            market: Some(LemmaMarketConfig {
                worker_counts: vec![13, 17],
                employer_counts: vec![11, 15],
                ..LemmaMarketConfig::default()
            }),
        };
        let r = lemma_audit_experiment(&cfg, 2).unwrap();
        assert_eq!(r.rows.len(), 2);
        assert!(r.frequencies.contains_key("cloud n=500 D=2 delta=0.5 b2"));
        assert_eq!(r.frequencies["market bound_violations_total"], 0.0);
    }

    #[test]
    fn config_json_shape() {
        let text = serde_json::to_string(&LemmasConfig::default()).unwrap();
        assert!(text.contains(r#""delta_rules":["inverse_dim",{"fixed":{"value":0.5}},{"power":{"exponent":0.49}}]"#));
        let back: LemmasConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, LemmasConfig::default());
    }
}
