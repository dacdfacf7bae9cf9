//! Seeded Monte Carlo experiments over grids of market sizes.
//!
//! Every trial draws its randomness from `trial_seed(seed, grid index,
//! trial, attempt)`, so results do not depend on scheduling or on the
//! number of worker threads. Aggregation runs in (grid index, trial) order.

mod fit;
mod lemmas;
mod lower_bound;
mod report;
mod scaling;
mod theorem2;

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use fit::{fit_loglog, Fit};
pub use lemmas::{lemma_audit_experiment, DeltaRule, LemmaMarketConfig, LemmasConfig};
pub use lower_bound::{
    event_b, lower_bound_experiment, make_lower_bound_market, LowerBoundConfig,
};
pub use report::{read_summary, write_report, Summary};
pub use scaling::{run_trials, ScalingConfig};
pub use theorem2::{theorem2_experiment, Imbalance, Theorem2Config};

use crate::corepoly::type_adjacency_graph;
use crate::error::{Error, Result};
use crate::market::{check_assumption_no_balanced_submarket, sample_market, MarketConfig, MarketRealization};
use crate::matching::degeneracy_scan;
use crate::rng::trial_seed;
use crate::Solution;

/// Resampling attempts per trial before a degenerate draw is treated as an
/// error.
const MAX_ATTEMPTS: u32 = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub grid_index: usize,
    pub trial: usize,
    pub n: usize,
    /// Degenerate draws discarded before this trial's sample.
    pub resampled: u32,
    pub seed: u64,
    pub core_size: Option<f64>,
    /// Named per-trial values; booleans are stored as 0/1.
    pub diagnostics: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub grid_index: usize,
    pub label: String,
    pub n: usize,
    pub trials: usize,
    pub mean_c: Option<f64>,
    pub stderr_c: Option<f64>,
    pub excluded_trials: u64,
    /// Mean of each diagnostic over the trials that report it.
    pub diagnostics: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lemma1Audit {
    /// Trials whose configuration has no balanced submarket.
    pub trials_audited: usize,
    /// Audited trials with a matched component lacking an unmatched agent.
    pub trials_with_unmarked_component: usize,
    pub unmarked_components: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub parameters: serde_json::Value,
    pub seed: u64,
    pub rows: Vec<GridRow>,
    pub trials: Vec<TrialOutcome>,
    pub fit: Option<Fit>,
    pub frequencies: BTreeMap<String, f64>,
    pub lemma1: Lemma1Audit,
    pub wall_clock_secs: f64,
}

/// One grid cell: a label, the size used in fits, and how to run a trial.
pub(crate) struct Cell<'a> {
    pub label: String,
    pub n: usize,
    pub run: Box<dyn Fn(u64) -> Result<Attempt> + Sync + 'a>,
}

/// Result of one attempt at a trial.
pub(crate) enum Attempt {
    Degenerate,
    Done {
        core_size: Option<f64>,
        diagnostics: BTreeMap<String, f64>,
    },
}

pub(crate) fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} worker threads: {e}")))
}

/// Runs every (cell, trial) pair and assembles the report skeleton.
pub(crate) fn run_cells(
    experiment: &str,
    parameters: serde_json::Value,
    cells: &[Cell<'_>],
    trials: usize,
    seed: u64,
    workers: usize,
) -> Result<ExperimentReport> {
    if trials < 2 {
        return Err(Error::Config(format!("need at least 2 trials per grid point, got {trials}")));
    }
    let start = Instant::now();
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|g| (0..trials).map(move |t| (g, t)))
        .collect();
    let pool = thread_pool(workers)?;
    let outcomes: Vec<TrialOutcome> = pool.install(|| {
        jobs.par_iter()
            .map(|&(g, t)| run_one(&cells[g], g, t, seed))
            .collect::<Result<Vec<_>>>()
    })?;

    let rows = cells
        .iter()
        .enumerate()
        .map(|(g, cell)| aggregate(g, cell, &outcomes[g * trials..(g + 1) * trials]))
        .collect::<Vec<_>>();
    let lemma1 = outcomes.iter().fold(Lemma1Audit::default(), |mut acc, o| {
        if let Some(&c) = o.diagnostics.get("unmarked_components") {
            acc.trials_audited += 1;
            acc.unmarked_components += c as usize;
            acc.trials_with_unmarked_component += (c > 0.0) as usize;
        }
        acc
    });
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.mean_c.map(|c| (r.n as f64, c)))
        .collect();
    Ok(ExperimentReport {
        experiment: experiment.to_string(),
        parameters,
        seed,
        fit: fit_loglog(&points),
        rows,
        trials: outcomes,
        frequencies: BTreeMap::new(),
        lemma1,
        wall_clock_secs: start.elapsed().as_secs_f64(),
    })
}

fn run_one(cell: &Cell<'_>, g: usize, t: usize, seed: u64) -> Result<TrialOutcome> {
    for attempt in 0..MAX_ATTEMPTS {
        let s = trial_seed(seed, g, t, attempt);
        let result = (cell.run)(s).map_err(|e| match e {
            Error::Inconsistency(msg) => Error::Inconsistency(format!(
                "{msg} (replay: seed {seed}, grid index {g}, trial {t}, attempt {attempt}, trial seed {s})"
            )),
            other => other,
        })?;
        if let Attempt::Done {
            core_size,
            diagnostics,
        } = result
        {
            return Ok(TrialOutcome {
                grid_index: g,
                trial: t,
                n: cell.n,
                resampled: attempt,
                seed: s,
                core_size,
                diagnostics,
            });
        }
    }
    Err(Error::Inconsistency(format!(
        "every one of {MAX_ATTEMPTS} draws was degenerate (seed {seed}, grid index {g}, trial {t})"
    )))
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn aggregate(g: usize, cell: &Cell<'_>, outcomes: &[TrialOutcome]) -> GridRow {
    let cs: Vec<f64> = outcomes.iter().filter_map(|o| o.core_size).collect();
    let (mean_c, stderr_c) = if cs.len() >= 2 {
        let m = mean(&cs);
        let var = cs.iter().map(|c| (c - m) * (c - m)).sum::<f64>() / (cs.len() - 1) as f64;
        (Some(m), Some((var / cs.len() as f64).sqrt()))
    } else {
        (cs.first().copied(), None)
    };
    let mut sums: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for o in outcomes {
        for (key, v) in &o.diagnostics {
            let e = sums.entry(key.clone()).or_insert((0.0, 0));
            e.0 += v;
            e.1 += 1;
        }
    }
    GridRow {
        grid_index: g,
        label: cell.label.clone(),
        n: cell.n,
        trials: outcomes.len(),
        mean_c,
        stderr_c,
        excluded_trials: outcomes.iter().map(|o| o.resampled as u64).sum(),
        diagnostics: sums
            .into_iter()
            .map(|(k, (s, c))| (k, s / c as f64))
            .collect(),
    }
}

/// Fraction of trials with `key == 1` among those reporting `key`.
pub(crate) fn frequency(trials: &[TrialOutcome], key: &str) -> Option<f64> {
    let vals: Vec<f64> = trials.iter().filter_map(|o| o.diagnostics.get(key).copied()).collect();
    (!vals.is_empty()).then(|| vals.iter().filter(|&&v| v == 1.0).count() as f64 / vals.len() as f64)
}

pub(crate) fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Standard market trial: sample, discard degenerate draws, solve, record
/// the core size and the type-graph audit, then let `extra` add
/// experiment-specific diagnostics.
pub(crate) fn market_trial<F>(config: &MarketConfig, seed: u64, audit_lemma1: bool, extra: F) -> Result<Attempt>
where
    F: Fn(&MarketRealization, &Solution, &mut BTreeMap<String, f64>) -> Result<()>,
{
    let real = sample_market(&config.clone().with_seed(seed))?;
    if degeneracy_scan(&real).flagged() {
        return Ok(Attempt::Degenerate);
    }
    let sol = crate::solve(&real)?;
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("matched_pairs".into(), sol.matching.total_pairs() as f64);
    if audit_lemma1 {
        let g = type_adjacency_graph(&real, &sol.matching);
        diagnostics.insert("unmarked_components".into(), g.unmarked_components as f64);
    }
    extra(&real, &sol, &mut diagnostics)?;
    Ok(Attempt::Done {
        core_size: Some(sol.bounds.core_size),
        diagnostics,
    })
}

/// Whether the type-graph audit applies to a configuration.
pub(crate) fn lemma1_applies(config: &MarketConfig) -> Result<bool> {
    Ok(check_assumption_no_balanced_submarket(config)?.holds)
}
