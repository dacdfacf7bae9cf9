//! Market configurations, assumption checks and seeded sampling.
//!
//! Workers (labor side) carry one productivity per employer type and
//! employers carry one productivity per worker type. The value of a match is
//! `u[k][q] + epsilon[j][k] + eta[i][q]` where `k` is the worker's type and
//! `q` the employer's type.

use std::collections::HashMap;

use rand::Rng;
use rand_distr::{Beta, Distribution as _};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, ROLE_EMPLOYER, ROLE_WORKER};

/// Productivity distribution. Both variants are atomless with support
/// `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distribution {
    #[default]
    Uniform01,
    TruncatedBeta { a: f64, b: f64 },
}

impl Distribution {
    fn validate(&self) -> Result<()> {
        match *self {
            Distribution::Uniform01 => Ok(()),
            Distribution::TruncatedBeta { a, b } => {
                if a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0 {
                    Ok(())
                } else {
                    Err(Error::Config(format!(
                        "beta shape parameters must be positive and finite, got a={a}, b={b}"
                    )))
                }
            }
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            Distribution::Uniform01 => rng.random::<f64>(),
            Distribution::TruncatedBeta { a, b } => {
                // parameters were validated; Beta::new only fails on non-positive shapes
                let beta = Beta::new(a, b).expect("validated beta parameters");
                beta.sample(rng).clamp(0.0, 1.0)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketConfig {
    /// Number of worker types.
    #[serde(rename = "k")]
    pub worker_types: usize,
    /// Number of employer types.
    #[serde(rename = "q")]
    pub employer_types: usize,
    pub worker_counts: Vec<usize>,
    pub employer_counts: Vec<usize>,
    /// `u[k][q]`, deterministic value of a (worker type, employer type) pair.
    pub u: Vec<Vec<f64>>,
    #[serde(default)]
    pub distribution: Distribution,
    #[serde(default)]
    pub seed: u64,
}

impl MarketConfig {
    /// Config with uniform productivities and seed 0.
    pub fn new(worker_counts: Vec<usize>, employer_counts: Vec<usize>, u: Vec<Vec<f64>>) -> Self {
        MarketConfig {
            worker_types: worker_counts.len(),
            employer_types: employer_counts.len(),
            worker_counts,
            employer_counts,
            u,
            distribution: Distribution::Uniform01,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_distribution(mut self, distribution: Distribution) -> Self {
        self.distribution = distribution;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let (k, q) = (self.worker_types, self.employer_types);
        if k == 0 || q == 0 {
            return Err(Error::Config(format!(
                "need at least one type per side, got k={k}, q={q}"
            )));
        }
        if self.worker_counts.len() != k {
            return Err(Error::Config(format!(
                "worker_counts has {} entries, expected k={k}",
                self.worker_counts.len()
            )));
        }
        if self.employer_counts.len() != q {
            return Err(Error::Config(format!(
                "employer_counts has {} entries, expected q={q}",
                self.employer_counts.len()
            )));
        }
        if let Some(t) = self.worker_counts.iter().position(|&c| c == 0) {
            return Err(Error::Config(format!("worker type {t} has zero agents")));
        }
        if let Some(t) = self.employer_counts.iter().position(|&c| c == 0) {
            return Err(Error::Config(format!("employer type {t} has zero agents")));
        }
        if self.u.len() != k || self.u.iter().any(|row| row.len() != q) {
            return Err(Error::Config(format!("u must be a {k}x{q} matrix")));
        }
        if self.u.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Config("u contains a non-finite entry".into()));
        }
        self.distribution.validate()
    }

    pub fn n_workers(&self) -> usize {
        self.worker_counts.iter().sum()
    }

    pub fn n_employers(&self) -> usize {
        self.employer_counts.iter().sum()
    }

    /// Market size `n = n_L + n_E`.
    pub fn n(&self) -> usize {
        self.n_workers() + self.n_employers()
    }

    /// Type of each agent when types occupy contiguous index blocks.
    fn type_vector(counts: &[usize]) -> Vec<usize> {
        counts
            .iter()
            .enumerate()
            .flat_map(|(t, &c)| std::iter::repeat_n(t, c))
            .collect()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: MarketConfig = serde_json::from_str(text).map_err(|source| Error::Json {
            context: "market config".into(),
            source,
        })?;
        config.validate()?;
        Ok(config)
    }
}

/// Named configurations used by the CLI round-trip tests and documentation.
pub fn builtin_templates() -> Vec<(&'static str, MarketConfig)> {
    vec![
        ("one_type_balanced", MarketConfig::new(vec![4], vec![4], vec![vec![1.0]])),
        ("one_type_unbalanced", MarketConfig::new(vec![4], vec![5], vec![vec![1.0]])),
        (
            "two_by_two",
            MarketConfig::new(
                vec![3, 5],
                vec![4, 6],
                vec![vec![1.0, 0.5], vec![0.0, 1.5]],
            ),
        ),
        (
            "lower_bound_k2",
            MarketConfig::new(vec![4, 4], vec![5], vec![vec![0.0], vec![3.0]]),
        ),
        (
            "negative_values",
            MarketConfig::new(
                vec![2, 3],
                vec![3, 2, 1],
                vec![vec![-1.0, 0.0, 3.0], vec![1.0, -1.0, 0.0]],
            ),
        ),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketRealization {
    pub config: MarketConfig,
    /// `epsilon[j][k]`: employer `j`'s productivity with respect to worker type `k`.
    pub epsilon: Vec<Vec<f64>>,
    /// `eta[i][q]`: worker `i`'s productivity with respect to employer type `q`.
    pub eta: Vec<Vec<f64>>,
    pub worker_type: Vec<usize>,
    pub employer_type: Vec<usize>,
}

impl MarketRealization {
    /// Assembles a realization from explicit productivity matrices, with the
    /// canonical contiguous type blocks.
    pub fn from_parts(
        config: MarketConfig,
        epsilon: Vec<Vec<f64>>,
        eta: Vec<Vec<f64>>,
    ) -> Result<Self> {
        config.validate()?;
        let real = MarketRealization {
            worker_type: MarketConfig::type_vector(&config.worker_counts),
            employer_type: MarketConfig::type_vector(&config.employer_counts),
            config,
            epsilon,
            eta,
        };
        real.validate()?;
        Ok(real)
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        let (k, q) = (self.config.worker_types, self.config.employer_types);
        let (n_l, n_e) = (self.config.n_workers(), self.config.n_employers());
        if self.epsilon.len() != n_e || self.epsilon.iter().any(|row| row.len() != k) {
            return Err(Error::Config(format!("epsilon must be {n_e}x{k}")));
        }
        if self.eta.len() != n_l || self.eta.iter().any(|row| row.len() != q) {
            return Err(Error::Config(format!("eta must be {n_l}x{q}")));
        }
        let in_unit = |v: &f64| (0.0..=1.0).contains(v);
        if !self.epsilon.iter().flatten().all(in_unit) || !self.eta.iter().flatten().all(in_unit) {
            return Err(Error::Config("productivities must lie in [0, 1]".into()));
        }
        if self.worker_type != MarketConfig::type_vector(&self.config.worker_counts)
            || self.employer_type != MarketConfig::type_vector(&self.config.employer_counts)
        {
            return Err(Error::Config(
                "type vectors must follow contiguous blocks of the configured counts".into(),
            ));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let real: MarketRealization = serde_json::from_str(text).map_err(|source| Error::Json {
            context: "market realization".into(),
            source,
        })?;
        real.validate()?;
        Ok(real)
    }

    pub fn n_workers(&self) -> usize {
        self.eta.len()
    }

    pub fn n_employers(&self) -> usize {
        self.epsilon.len()
    }

    pub fn worker_types(&self) -> usize {
        self.config.worker_types
    }

    pub fn employer_types(&self) -> usize {
        self.config.employer_types
    }

    /// `u(tau(i), q) + eta[i][q]`: worker `i`'s full value toward type `q`.
    #[inline]
    pub fn eta_tilde(&self, i: usize, q: usize) -> f64 {
        self.config.u[self.worker_type[i]][q] + self.eta[i][q]
    }

    /// Match value without bounds checking beyond slice indexing.
    #[inline]
    pub fn value(&self, i: usize, j: usize) -> f64 {
        let k = self.worker_type[i];
        let q = self.employer_type[j];
        self.config.u[k][q] + self.epsilon[j][k] + self.eta[i][q]
    }

    /// Match value of worker `i` and employer `j`.
    pub fn match_value(&self, i: usize, j: usize) -> Result<f64> {
        if i >= self.n_workers() || j >= self.n_employers() {
            return Err(Error::Usage(format!(
                "agent index out of range: worker {i} of {}, employer {j} of {}",
                self.n_workers(),
                self.n_employers()
            )));
        }
        Ok(self.value(i, j))
    }

    /// Indices of workers of type `k`.
    pub fn workers_of_type(&self, k: usize) -> std::ops::Range<usize> {
        let start: usize = self.config.worker_counts[..k].iter().sum();
        start..start + self.config.worker_counts[k]
    }

    /// Indices of employers of type `q`.
    pub fn employers_of_type(&self, q: usize) -> std::ops::Range<usize> {
        let start: usize = self.config.employer_counts[..q].iter().sum();
        start..start + self.config.employer_counts[q]
    }
}

/// Draws a realization. The result is a pure function of the config
/// (including its seed): each entry comes from its own stream keyed by
/// (role, agent, coordinate).
pub fn sample_market(config: &MarketConfig) -> Result<MarketRealization> {
    config.validate()?;
    let dist = config.distribution;
    let draw = |role: u64, agent: usize, coord: usize| {
        let mut rng = rng::stream_rng(config.seed, &[role, agent as u64, coord as u64]);
        dist.sample(&mut rng)
    };
    let epsilon = (0..config.n_employers())
        .map(|j| (0..config.worker_types).map(|k| draw(ROLE_EMPLOYER, j, k)).collect())
        .collect();
    let eta = (0..config.n_workers())
        .map(|i| (0..config.employer_types).map(|q| draw(ROLE_WORKER, i, q)).collect())
        .collect();
    MarketRealization::from_parts(config.clone(), epsilon, eta)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalanceCheck {
    /// True when no nonempty pair of type subsets has equal agent totals.
    pub holds: bool,
    /// A violating `(worker types, employer types)` pair, 0-based.
    pub witness: Option<(Vec<usize>, Vec<usize>)>,
}

const MAX_SUBSET_TYPES: usize = 24;

/// Checks that no submarket formed by a subset of worker types and a subset
/// of employer types is balanced.
pub fn check_assumption_no_balanced_submarket(config: &MarketConfig) -> Result<BalanceCheck> {
    config.validate()?;
    let (k, q) = (config.worker_types, config.employer_types);
    if k + q > MAX_SUBSET_TYPES {
        return Err(Error::Capability(format!(
            "subset enumeration supports at most {MAX_SUBSET_TYPES} types in total, got {}",
            k + q
        )));
    }
    let subset_sum = |counts: &[usize], mask: u32| -> usize {
        counts
            .iter()
            .enumerate()
            .filter(|(t, _)| mask & (1 << t) != 0)
            .map(|(_, &c)| c)
            .sum()
    };
    let mut worker_sums: HashMap<usize, u32> = HashMap::new();
    for mask in 1u32..(1 << k) {
        worker_sums
            .entry(subset_sum(&config.worker_counts, mask))
            .or_insert(mask);
    }
    let members = |mask: u32, n: usize| (0..n).filter(|t| mask & (1 << t) != 0).collect();
    for mask in 1u32..(1 << q) {
        if let Some(&wmask) = worker_sums.get(&subset_sum(&config.employer_counts, mask)) {
            return Ok(BalanceCheck {
                holds: false,
                witness: Some((members(wmask, k), members(mask, q))),
            });
        }
    }
    Ok(BalanceCheck {
        holds: true,
        witness: None,
    })
}

/// True iff every type has at least `c * n` agents.
pub fn check_assumption_linear_growth(config: &MarketConfig, c: f64) -> bool {
    let n = config.n() as f64;
    config
        .worker_counts
        .iter()
        .chain(&config.employer_counts)
        .all(|&count| count as f64 >= c * n)
}
