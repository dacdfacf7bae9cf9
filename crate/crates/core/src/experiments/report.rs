//! Report files: `trials.csv` (one row per trial), `aggregate.csv` (one row
//! per grid point) and `summary.json`.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ExperimentReport, Fit, GridRow, Lemma1Audit};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub experiment: String,
    pub parameters: serde_json::Value,
    pub seed: u64,
    pub rows: Vec<GridRow>,
    pub fit: Option<Fit>,
    pub frequencies: BTreeMap<String, f64>,
    pub lemma1: Lemma1Audit,
    pub wall_clock_secs: f64,
}

impl From<&ExperimentReport> for Summary {
    fn from(r: &ExperimentReport) -> Self {
        Summary {
            experiment: r.experiment.clone(),
            parameters: r.parameters.clone(),
            seed: r.seed,
            rows: r.rows.clone(),
            fit: r.fit.clone(),
            frequencies: r.frequencies.clone(),
            lemma1: r.lemma1,
            wall_clock_secs: r.wall_clock_secs,
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

pub fn write_report(report: &ExperimentReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let keys: BTreeSet<&String> = report.trials.iter().flat_map(|t| t.diagnostics.keys()).collect();
    let mut w = csv_writer(&dir.join("trials.csv"))?;
    let mut header: Vec<String> = ["grid_index", "label", "n", "trial", "resampled", "seed", "core_size"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(keys.iter().map(|k| k.to_string()));
    w.write_record(&header)?;
    for t in &report.trials {
        let mut rec = vec![
            t.grid_index.to_string(),
            report.rows[t.grid_index].label.clone(),
            t.n.to_string(),
            t.trial.to_string(),
            t.resampled.to_string(),
            t.seed.to_string(),
            opt(t.core_size),
        ];
        rec.extend(keys.iter().map(|k| opt(t.diagnostics.get(*k).copied())));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(dir.join("trials.csv"), e))?;

    let keys: BTreeSet<&String> = report.rows.iter().flat_map(|r| r.diagnostics.keys()).collect();
    let mut w = csv_writer(&dir.join("aggregate.csv"))?;
    let mut header: Vec<String> =
        ["grid_index", "label", "n", "trials", "mean_c", "stderr_c", "excluded_trials"]
            .iter()
            .map(|s| s.to_string())
            .collect();
    header.extend(keys.iter().map(|k| format!("mean_{k}")));
    w.write_record(&header)?;
    for r in &report.rows {
        let mut rec = vec![
            r.grid_index.to_string(),
            r.label.clone(),
            r.n.to_string(),
            r.trials.to_string(),
            opt(r.mean_c),
            opt(r.stderr_c),
            r.excluded_trials.to_string(),
        ];
        rec.extend(keys.iter().map(|k| opt(r.diagnostics.get(*k).copied())));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(dir.join("aggregate.csv"), e))?;

    let path = dir.join("summary.json");
    let text = serde_json::to_string_pretty(&Summary::from(report)).map_err(|source| Error::Json {
        context: "experiment summary".into(),
        source,
    })?;
    fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))
}

pub fn read_summary(path: &Path) -> Result<Summary> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        context: format!("summary {}", path.display()),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{run_trials, ScalingConfig};
    use super::*;

    #[test]
    fn writes_three_files_that_read_back() {
        let cfg = ScalingConfig {
            n_grid: vec![30, 60],
            trials: 3,
            ..ScalingConfig::default()
        };
        let report = run_trials(&cfg, 1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_report(&report, dir.path()).unwrap();
        let trials = fs::read_to_string(dir.path().join("trials.csv")).unwrap();
        assert_eq!(trials.lines().count(), 1 + 6);
        assert!(trials.starts_with("grid_index,label,n,trial,resampled,seed,core_size,"));
        let agg = fs::read_to_string(dir.path().join("aggregate.csv")).unwrap();
        assert_eq!(agg.lines().count(), 3);
        let summary = read_summary(&dir.path().join("summary.json")).unwrap();
        assert_eq!(summary, Summary::from(&report));
        // mean_C is recomputable from the per-trial values
        for row in &summary.rows {
            let cs: Vec<f64> = report
                .trials
                .iter()
                .filter(|t| t.grid_index == row.grid_index)
                .filter_map(|t| t.core_size)
                .collect();
            let m = cs.iter().sum::<f64>() / cs.len() as f64;
            assert!((m - row.mean_c.unwrap()).abs() <= 1e-12);
        }
    }
}
