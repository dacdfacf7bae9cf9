//! Per-type check of the price-range bounds that hold under the hypercube
//! gap events.

use serde::{Deserialize, Serialize};

use super::CoreBounds;
use crate::error::{Error, Result};
use crate::geometry::{event_indicators, f1, f2, region_statistics, EventIndicators, PointCloud};
use crate::market::MarketRealization;
use crate::matching::Matching;
use crate::TOLERANCE;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Worker,
    Employer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TypeClass {
    /// Some agents matched and some unmatched.
    Mixed,
    AllMatched,
    AllUnmatched,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeAudit {
    pub side: Side,
    pub index: usize,
    pub dim: usize,
    pub n_t: usize,
    pub class: TypeClass,
    /// `None` when the type has fewer than two agents.
    pub events: Option<EventIndicators>,
    /// Largest and smallest price range over the type's matched pairs.
    pub max_width: f64,
    pub min_width: f64,
    /// `max(f1 + delta, f2 / delta^(D-1))`.
    pub mixed_bound: f64,
    /// `2 f1 + 2 delta`, bound on `max_width - min_width`.
    pub relative_bound: f64,
    pub mixed_checked: bool,
    pub relative_checked: bool,
    pub violated: bool,
    /// Whether every shifted price of the type is at least delta, for the
    /// two witness vectors. Reported only.
    pub large_prices_at_min: bool,
    pub large_prices_at_max: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaAudit {
    pub delta: f64,
    pub types: Vec<TypeAudit>,
    pub violations: usize,
}

impl LemmaAudit {
    pub fn checked(&self) -> usize {
        self.types
            .iter()
            .map(|t| t.mixed_checked as usize + t.relative_checked as usize)
            .sum()
    }
}

pub fn audit_upper_bound_lemmas(
    real: &MarketRealization,
    m: &Matching,
    b: &CoreBounds,
    delta: f64,
) -> Result<LemmaAudit> {
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(Error::Usage(format!("audit delta must lie in (0, 1/2], got {delta}")));
    }
    let (kk, qq) = (real.worker_types(), real.employer_types());
    let (worker_partner, employer_partner) = m.partners(real.n_workers(), real.n_employers());
    let mut types = Vec::with_capacity(kk + qq);

    for (side, count) in [(Side::Worker, kk), (Side::Employer, qq)] {
        for t in 0..count {
            let (dim, points, matched): (usize, Vec<Vec<f64>>, usize) = match side {
                Side::Worker => {
                    let r = real.workers_of_type(t);
                    let matched = r.clone().filter(|&i| worker_partner[i].is_some()).count();
                    (qq, r.map(|i| real.eta[i].clone()).collect(), matched)
                }
                Side::Employer => {
                    let r = real.employers_of_type(t);
                    let matched = r.clone().filter(|&j| employer_partner[j].is_some()).count();
                    (kk, r.map(|j| real.epsilon[j].clone()).collect(), matched)
                }
            };
            let n_t = points.len();
            let class = if matched == 0 {
                TypeClass::AllUnmatched
            } else if matched == n_t {
                TypeClass::AllMatched
            } else {
                TypeClass::Mixed
            };

            // Prices of the pairs involving t, as beta values.
            let mut widths = Vec::new();
            let mut beta_min = Vec::new();
            let mut beta_max = Vec::new();
            for (a, nb) in b.nodes.iter().enumerate() {
                let (own, shift, sign) = match side {
                    Side::Worker => (nb.k, real.config.u[nb.k][nb.q], 1.0),
                    Side::Employer => (nb.q, 0.0, -1.0),
                };
                if own == t {
                    widths.push(nb.width());
                    beta_min.push(sign * b.witness_min[a] - shift);
                    beta_max.push(sign * b.witness_max[a] - shift);
                }
            }
            let max_width = widths.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let min_width = widths.iter().copied().fold(f64::INFINITY, f64::min);

            let events = if n_t >= 2 {
                let stats = region_statistics(&PointCloud::new(dim, points)?, delta)?;
                Some(event_indicators(&stats, n_t, dim, delta)?)
            } else {
                None
            };
            let n_f = n_t.max(2);
            let g1 = f1(n_f, dim);
            let mixed_bound = (g1 + delta).max(f2(n_f) / delta.powi(dim as i32 - 1));
            let relative_bound = 2.0 * g1 + 2.0 * delta;
            let ev = events.unwrap_or(EventIndicators {
                b1: false,
                b2: false,
                b3: false,
            });
            let mixed_checked = events.is_some() && class == TypeClass::Mixed && ev.b1 && ev.b2;
            let relative_checked = events.is_some() && class == TypeClass::AllMatched && ev.b1;
            let violated = (mixed_checked && max_width > mixed_bound + TOLERANCE)
                || (relative_checked && max_width - min_width > relative_bound + TOLERANCE);

            types.push(TypeAudit {
                side,
                index: t,
                dim,
                n_t,
                class,
                events,
                max_width: if widths.is_empty() { 0.0 } else { max_width },
                min_width: if widths.is_empty() { 0.0 } else { min_width },
                mixed_bound,
                relative_bound,
                mixed_checked,
                relative_checked,
                violated,
                large_prices_at_min: beta_min.iter().all(|&x| x >= delta),
                large_prices_at_max: beta_max.iter().all(|&x| x >= delta),
            });
        }
    }
    let violations = types.iter().filter(|t| t.violated).count();
    Ok(LemmaAudit {
        delta,
        types,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{sample_market, MarketConfig};

    #[test]
    fn audit_classifies_types() {
        let cfg = MarketConfig::new(vec![130, 170], vec![110, 150], vec![vec![1.0, 0.5], vec![0.5, 1.0]]).with_seed(8);
        let real = sample_market(&cfg).unwrap();
        let sol = crate::solve(&real).unwrap();
        let delta = (cfg.n() as f64).powf(-0.5);
        let audit = audit_upper_bound_lemmas(&real, &sol.matching, &sol.bounds, delta).unwrap();
        assert_eq!(audit.types.len(), 4);
        assert_eq!(audit.violations, 0);
        // 300 workers against 260 employers: every employer type is fully matched
        assert!(audit
            .types
            .iter()
            .filter(|t| t.side == Side::Employer)
            .all(|t| t.class == TypeClass::AllMatched));
    }

    #[test]
    fn unmatched_type_is_skipped() {
        let cfg = MarketConfig::new(vec![3, 3], vec![3], vec![vec![1.0], vec![-5.0]]).with_seed(2);
        let real = sample_market(&cfg).unwrap();
        let sol = crate::solve(&real).unwrap();
        let audit = audit_upper_bound_lemmas(&real, &sol.matching, &sol.bounds, 0.3).unwrap();
        let t = &audit.types[1];
        assert_eq!(t.class, TypeClass::AllUnmatched);
        assert!(!t.mixed_checked && !t.relative_checked);
    }

    #[test]
    fn rejects_delta_out_of_range() {
        let real = sample_market(&MarketConfig::new(vec![1], vec![1], vec![vec![1.0]])).unwrap();
        let sol = crate::solve(&real).unwrap();
        assert!(audit_upper_bound_lemmas(&real, &sol.matching, &sol.bounds, 0.0).is_err());
        assert!(audit_upper_bound_lemmas(&real, &sol.matching, &sol.bounds, 0.7).is_err());
    }
}
