//! Command-line front end for `core-gauge`.
//!
//! Exit codes: 0 success, 1 `verify` found an unstable price vector,
//! 2 invalid input or I/O failure, 3 instance too large, 4 internal
//! inconsistency.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use core_gauge::experiments::{
    lemma_audit_experiment, lower_bound_experiment, run_trials, theorem2_experiment, write_report,
    ExperimentReport, LemmasConfig, LowerBoundConfig, ScalingConfig, Theorem2Config,
};
use core_gauge::market::builtin_templates;
use core_gauge::oracle::verify_stability;
use core_gauge::{
    check_assumption_linear_growth, check_assumption_no_balanced_submarket, core_size, feasible_midpoint,
    sample_market, BalanceCheck, Error, MarketConfig, MarketRealization, Matching, NodeBounds, Result,
};

pub const EXIT_UNSTABLE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_CAPABILITY: i32 = 3;
pub const EXIT_INCONSISTENT: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "core-gauge", version, about = "Core size of assignment markets with agent types")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a market realization from a configuration.
    Gen {
        /// Market configuration (JSON).
        #[arg(long, conflicts_with = "template", required_unless_present = "template")]
        config: Option<PathBuf>,
        /// Built-in configuration name instead of a file.
        #[arg(long)]
        template: Option<String>,
        /// Seed; falls back to CORE_GAUGE_SEED, then the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Matching, per-pair price bounds and core size of a stored market.
    Solve {
        #[arg(long)]
        market: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check every price vector of a solution against the stability conditions.
    Verify {
        #[arg(long)]
        market: PathBuf,
        #[arg(long)]
        solution: PathBuf,
    },
    /// Run a Monte Carlo experiment and write trials.csv, aggregate.csv and summary.json.
    Experiment {
        #[arg(value_enum)]
        kind: ExperimentKind,
        /// Experiment configuration (JSON); built-in defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
        /// Worker threads; defaults to the available parallelism.
        #[arg(long)]
        workers: Option<usize>,
        /// Overrides the configuration's seed; falls back to CORE_GAUGE_SEED.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Report whether a configuration satisfies the structural assumptions.
    Assumptions {
        #[arg(long)]
        config: PathBuf,
        /// Minimum share of the market every type must hold.
        #[arg(long, default_value_t = 0.05)]
        min_share: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExperimentKind {
    Scaling,
    Lowerbound,
    Theorem2,
    Lemmas,
}

/// What `solve` writes: the matching and, aligned with `nodes`, three core
/// price vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub matching: Matching,
    pub nodes: Vec<NodeBounds>,
    pub core_size: f64,
    pub empty_matching: bool,
    pub witness_min: Vec<f64>,
    pub witness_max: Vec<f64>,
    pub midpoint: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOutcome {
    pub vector: String,
    pub stable: bool,
    pub violations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub no_balanced_submarket: BalanceCheck,
    pub min_type_share: f64,
    pub required_share: f64,
    pub linear_growth: bool,
}

pub const SEED_ENV: &str = "CORE_GAUGE_SEED";

/// The `--seed` flag wins over the environment value.
pub fn resolve_seed(flag: Option<u64>, env: Option<&str>) -> Result<Option<u64>> {
    match (flag, env) {
        (Some(s), _) => Ok(Some(s)),
        (None, Some(v)) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Usage(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        (None, None) => Ok(None),
    }
}

fn env_seed() -> Option<String> {
    std::env::var(SEED_ENV).ok()
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Capability(_) => EXIT_CAPABILITY,
        Error::Inconsistency(_) => EXIT_INCONSISTENT,
        _ => EXIT_INVALID,
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn to_json<T: Serialize>(value: &T, what: &str) -> Result<String> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|source| Error::Json {
            context: what.into(),
            source,
        })
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&read(path)?).map_err(|source| Error::Json {
        context: format!("config {}", path.display()),
        source,
    })
}

pub fn solve_market(real: &MarketRealization) -> Result<SolutionFile> {
    let sol = core_gauge::solve(real)?;
    let size = core_size(&sol.bounds, &sol.matching);
    let midpoint = feasible_midpoint(&sol.graph, &sol.bounds)?;
    Ok(SolutionFile {
        nodes: sol.bounds.nodes.clone(),
        core_size: size.value,
        empty_matching: size.empty_matching,
        witness_min: sol.bounds.witness_min,
        witness_max: sol.bounds.witness_max,
        midpoint,
        matching: sol.matching,
    })
}

pub fn verify_solution(real: &MarketRealization, sol: &SolutionFile) -> Result<Vec<VerifyOutcome>> {
    let named = [
        ("witness_min", &sol.witness_min),
        ("witness_max", &sol.witness_max),
        ("midpoint", &sol.midpoint),
    ];
    named
        .into_iter()
        .map(|(name, alpha)| {
            if alpha.len() != sol.nodes.len() {
                return Err(Error::Usage(format!(
                    "{name} has {} entries for {} type pairs",
                    alpha.len(),
                    sol.nodes.len()
                )));
            }
            let map = sol.nodes.iter().zip(alpha).map(|(nb, &a)| ((nb.k, nb.q), a)).collect();
            let report = verify_stability(real, &sol.matching, &map)?;
            Ok(VerifyOutcome {
                vector: name.into(),
                stable: report.stable,
                violations: report.violations,
            })
        })
        .collect()
}

pub fn assumption_report(config: &MarketConfig, min_share: f64) -> Result<AssumptionReport> {
    let balance = check_assumption_no_balanced_submarket(config)?;
    let n = config.n() as f64;
    let smallest = config
        .worker_counts
        .iter()
        .chain(&config.employer_counts)
        .min()
        .copied()
        .unwrap_or(0);
    Ok(AssumptionReport {
        no_balanced_submarket: balance,
        min_type_share: smallest as f64 / n,
        required_share: min_share,
        linear_growth: check_assumption_linear_growth(config, min_share),
    })
}

pub fn run_experiment(
    kind: ExperimentKind,
    config: Option<&Path>,
    seed: Option<u64>,
    workers: usize,
) -> Result<ExperimentReport> {
    macro_rules! load {
        ($ty:ty) => {{
            let mut cfg: $ty = match config {
                Some(p) => parse_config(p)?,
                None => <$ty>::default(),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            cfg
        }};
    }
    match kind {
        ExperimentKind::Scaling => run_trials(&load!(ScalingConfig), workers),
        ExperimentKind::Lowerbound => lower_bound_experiment(&load!(LowerBoundConfig), workers),
        ExperimentKind::Theorem2 => theorem2_experiment(&load!(Theorem2Config), workers),
        ExperimentKind::Lemmas => lemma_audit_experiment(&load!(LemmasConfig), workers),
    }
}

fn execute(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Gen {
            config,
            template,
            seed,
            out,
        } => {
            let mut cfg = match (config, template) {
                (Some(path), _) => MarketConfig::from_json(&read(&path)?)?,
                (None, Some(name)) => builtin_templates()
                    .into_iter()
                    .find(|(n, _)| *n == name)
                    .map(|(_, c)| c)
                    .ok_or_else(|| {
                        let names: Vec<_> = builtin_templates().iter().map(|(n, _)| *n).collect();
                        Error::Usage(format!("unknown template {name:?}; known: {}", names.join(", ")))
                    })?,
                (None, None) => return Err(Error::Usage("gen needs --config or --template".into())),
            };
            if let Some(s) = resolve_seed(seed, env_seed().as_deref())? {
                cfg.seed = s;
            }
            let real = sample_market(&cfg)?;
            emit(&to_json(&real, "market")?, out.as_deref())?;
            Ok(0)
        }
        Command::Solve { market, out } => {
            let real = MarketRealization::from_json(&read(&market)?)?;
            let sol = solve_market(&real)?;
            emit(&to_json(&sol, "solution")?, out.as_deref())?;
            Ok(0)
        }
        Command::Verify { market, solution } => {
            let real = MarketRealization::from_json(&read(&market)?)?;
            let sol: SolutionFile = serde_json::from_str(&read(&solution)?).map_err(|source| Error::Json {
                context: format!("solution {}", solution.display()),
                source,
            })?;
            let outcomes = verify_solution(&real, &sol)?;
            emit(&to_json(&outcomes, "verification")?, None)?;
            Ok(if outcomes.iter().all(|o| o.stable) { 0 } else { EXIT_UNSTABLE })
        }
        Command::Experiment {
            kind,
            config,
            out_dir,
            workers,
            seed,
        } => {
            let workers = workers
                .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let seed = resolve_seed(seed, env_seed().as_deref())?;
            let report = run_experiment(kind, config.as_deref(), seed, workers)?;
            write_report(&report, &out_dir)?;
            if let Some(fit) = &report.fit {
                println!("slope {:.4} intercept {:.4}", fit.slope, fit.intercept);
            }
            for (key, f) in &report.frequencies {
                println!("{key}: {f}");
            }
            println!(
                "lemma 1 audit: {} trials, {} unmarked components",
                report.lemma1.trials_audited, report.lemma1.unmarked_components
            );
            println!("wrote {}", out_dir.display());
            Ok(0)
        }
        Command::Assumptions { config, min_share } => {
            let cfg = MarketConfig::from_json(&read(&config)?)?;
            emit(&to_json(&assumption_report(&cfg, min_share)?, "assumptions")?, None)?;
            Ok(0)
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
