//! Simulation laboratory for transferable-utility assignment markets with
//! agent types.
//!
//! The pipeline is: sample a [`MarketRealization`] from a [`MarketConfig`],
//! solve for the maximum-weight [`Matching`], build the difference-constraint
//! description of the core over type-pair prices ([`ConstraintGraph`]), and
//! read off the per-pair price extremes and the core size ([`CoreBounds`]).
//! The [`experiments`] module runs these steps as seeded Monte Carlo grids.

pub mod corepoly;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod market;
pub mod matching;
pub mod oracle;
pub mod rng;

pub use corepoly::{
    audit_upper_bound_lemmas, build_constraint_graph, core_bounds, core_size, feasible_midpoint,
    type_adjacency_graph, ConstraintGraph, CoreBounds, CoreSize, DiffEdge, LemmaAudit, NodeBounds,
    TypeAdjacencyGraph, TypePair,
};
pub use error::{Error, Result};
pub use geometry::{event_indicators, region_statistics, EventIndicators, PointCloud, RegionStats};
pub use market::{
    check_assumption_linear_growth, check_assumption_no_balanced_submarket, sample_market,
    BalanceCheck, Distribution, MarketConfig, MarketRealization,
};
pub use matching::{degeneracy_scan, max_weight_matching, DegeneracyReport, Matching, Solver};

/// Absolute tolerance used for every feasibility and stability comparison.
pub const TOLERANCE: f64 = 1e-9;

/// Solved market: everything downstream code needs from one realization.
#[derive(Debug, Clone)]
pub struct Solution {
    pub matching: Matching,
    pub graph: ConstraintGraph,
    pub bounds: CoreBounds,
}

/// Runs matching, constraint construction and price extremes in sequence.
pub fn solve(real: &MarketRealization) -> Result<Solution> {
    let matching = max_weight_matching(real);
    let graph = build_constraint_graph(real, &matching)?;
    let bounds = core_bounds(&graph)?;
    Ok(Solution {
        matching,
        graph,
        bounds,
    })
}
