//! Order-statistic gaps of point clouds in the unit hypercube.
//!
//! For the productivity vectors of one agent type these statistics control
//! how far the prices attached to that type can move inside the core.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
}

impl PointCloud {
    pub fn new(dim: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Usage("point cloud dimension must be positive".into()));
        }
        for p in &points {
            if p.len() != dim {
                return Err(Error::Usage(format!(
                    "point of length {} in a cloud of dimension {dim}",
                    p.len()
                )));
            }
            if !p.iter().all(|x| (0.0..=1.0).contains(x)) {
                return Err(Error::Usage("point coordinates must lie in [0, 1]".into()));
            }
        }
        Ok(PointCloud { dim, points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionStats {
    pub delta: f64,
    /// `v[k]`: largest gap of coordinate k over points where k is maximal.
    pub v: Vec<f64>,
    /// Ordered pairs `(k1, k2)`, `k1 != k2`, in lexicographic order; the
    /// `vpair` and `npair` entries are aligned with it.
    pub pairs: Vec<(usize, usize)>,
    pub vpair: Vec<f64>,
    /// `vtilde[k]`: largest gap of coordinate k inside the slab where all
    /// other coordinates are at most delta.
    pub vtilde: Vec<f64>,
    pub npair: Vec<usize>,
}

impl RegionStats {
    pub fn max_v(&self) -> f64 {
        self.v.iter().chain(&self.vpair).copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_vtilde(&self) -> f64 {
        self.vtilde.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Named values for one CSV row.
    pub fn csv_fields(&self) -> Vec<(String, f64)> {
        let mut out = vec![("delta".to_string(), self.delta)];
        for (k, v) in self.v.iter().enumerate() {
            out.push((format!("v_{k}"), *v));
        }
        for (&(a, b), v) in self.pairs.iter().zip(&self.vpair) {
            out.push((format!("vpair_{a}_{b}"), *v));
        }
        for (k, v) in self.vtilde.iter().enumerate() {
            out.push((format!("vtilde_{k}"), *v));
        }
        for (&(a, b), c) in self.pairs.iter().zip(&self.npair) {
            out.push((format!("npair_{a}_{b}"), *c as f64));
        }
        out
    }
}

/// Largest gap between consecutive values of `values` together with the two
/// sentinels. Sorts `values` in place.
fn max_gap(values: &mut [f64], lo: f64, hi: f64) -> f64 {
    values.sort_unstable_by(f64::total_cmp);
    let mut prev = lo;
    let mut best: f64 = 0.0;
    for &x in values.iter() {
        best = best.max(x - prev);
        prev = x;
    }
    best.max(hi - prev)
}

fn dominates_except(p: &[f64], k1: usize, skip: usize) -> bool {
    p.iter()
        .enumerate()
        .all(|(k, &x)| k == k1 || k == skip || p[k1] >= x)
}

fn ordered_pairs(d: usize) -> Vec<(usize, usize)> {
    (0..d)
        .flat_map(|a| (0..d).filter(move |&b| b != a).map(move |b| (a, b)))
        .collect()
}

pub fn region_statistics(cloud: &PointCloud, delta: f64) -> Result<RegionStats> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::Usage(format!("delta must lie in [0, 1], got {delta}")));
    }
    let d = cloud.dim;
    let pts = &cloud.points;
    // The difference regions are only defined for delta <= 1/2.
    let delta_pair = delta.min(0.5);

    let v = (0..d)
        .map(|k| {
            let mut vals: Vec<f64> = pts
                .iter()
                .filter(|p| dominates_except(p, k, k))
                .map(|p| p[k])
                .collect();
            max_gap(&mut vals, 0.0, 1.0)
        })
        .collect();

    let pairs = ordered_pairs(d);
    let mut vpair = Vec::with_capacity(pairs.len());
    let mut npair = Vec::with_capacity(pairs.len());
    for &(k1, k2) in &pairs {
        let mut vals: Vec<f64> = pts
            .iter()
            .filter(|p| p[k1] >= delta_pair && dominates_except(p, k1, k2))
            .map(|p| p[k1] - p[k2])
            .collect();
        vpair.push(max_gap(&mut vals, -1.0 + delta_pair, 1.0));
        npair.push(
            pts.iter()
                .filter(|p| p[k1] >= p[k2] - delta && dominates_except(p, k1, k2))
                .count(),
        );
    }

    let vtilde = (0..d)
        .map(|k| {
            let mut vals: Vec<f64> = pts
                .iter()
                .filter(|p| p.iter().enumerate().all(|(k2, &x)| k2 == k || x <= delta))
                .map(|p| p[k])
                .collect();
            max_gap(&mut vals, 0.0, 1.0)
        })
        .collect();

    Ok(RegionStats {
        delta,
        v,
        pairs,
        vpair,
        vtilde,
        npair,
    })
}

/// Threshold for the gap events: `3 (6 D (D-1) ln n / n)^(1/D)`, and
/// `36 ln n / n` in one dimension.
pub fn f1(n: usize, d: usize) -> f64 {
    let n = n as f64;
    if d <= 1 {
        3.0 * 12.0 * n.ln() / n
    } else {
        let d = d as f64;
        3.0 * (6.0 * d * (d - 1.0) * n.ln() / n).powf(1.0 / d)
    }
}

/// Threshold for the slab events: `6 ln n / n`.
pub fn f2(n: usize) -> f64 {
    let n = n as f64;
    6.0 * n.ln() / n
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventIndicators {
    pub b1: bool,
    pub b2: bool,
    pub b3: bool,
}

pub fn event_indicators(stats: &RegionStats, n_t: usize, d: usize, delta: f64) -> Result<EventIndicators> {
    if n_t < 2 {
        return Err(Error::Usage(format!("event thresholds need n_t >= 2, got {n_t}")));
    }
    if d == 0 || stats.v.len() != d {
        return Err(Error::Usage(format!(
            "statistics have dimension {}, expected {d}",
            stats.v.len()
        )));
    }
    let b1 = stats.max_v() <= f1(n_t, d);
    let b2 = stats.max_vtilde() <= f2(n_t) / delta.powi(d as i32 - 1);
    let need = 1.0 + n_t as f64 / d as f64;
    let b3 = stats.npair.iter().all(|&c| c as f64 >= need);
    Ok(EventIndicators { b1, b2, b3 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cloud(d: usize, pts: &[&[f64]]) -> PointCloud {
        PointCloud::new(d, pts.iter().map(|p| p.to_vec()).collect()).unwrap()
    }

    #[test]
    fn one_dimensional_gap() {
        let c = cloud(1, &[&[0.3], &[0.4], &[0.8]]);
        let s = region_statistics(&c, 0.1).unwrap();
        assert!((s.v[0] - 0.4).abs() < 1e-15);
        assert!(s.pairs.is_empty());
    }

    #[test]
    fn empty_cloud_has_unit_gaps() {
        let s = region_statistics(&cloud(3, &[]), 0.2).unwrap();
        assert!(s.v.iter().all(|&v| v == 1.0));
        assert!(s.vtilde.iter().all(|&v| v == 1.0));
        assert!(s.vpair.iter().all(|&v| (v - 1.8).abs() < 1e-15));
        assert!(s.npair.iter().all(|&c| c == 0));
    }

    #[test]
    fn two_dimensional_example() {
        let c = cloud(2, &[&[0.9, 0.2], &[0.5, 0.7]]);
        let s = region_statistics(&c, 0.1).unwrap();
        assert!((s.v[0] - 0.9).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_delta() {
        let c = cloud(1, &[&[0.5]]);
        assert!(matches!(region_statistics(&c, 1.5), Err(Error::Usage(_))));
        assert!(matches!(region_statistics(&c, -0.1), Err(Error::Usage(_))));
        assert!(matches!(region_statistics(&c, f64::NAN), Err(Error::Usage(_))));
    }

    #[test]
    fn empty_cloud_fails_gap_event_at_scale() {
        let s = region_statistics(&cloud(2, &[]), 0.01).unwrap();
        let ev = event_indicators(&s, 10_000, 2, 0.01).unwrap();
        assert!(!ev.b1);
        assert!(matches!(event_indicators(&s, 1, 2, 0.01), Err(Error::Usage(_))));
    }

    #[test]
    fn threshold_values() {
        assert!((f1(100, 1) - 36.0 * 100f64.ln() / 100.0).abs() < 1e-15);
        assert!((f1(100, 2) - 3.0 * (12.0 * 100f64.ln() / 100.0).sqrt()).abs() < 1e-12);
        assert!((f2(100) - 6.0 * 100f64.ln() / 100.0).abs() < 1e-15);
    }

    /// Gap of a set given as a plain list, by checking every candidate pair.
    fn brute_gap(vals: &[f64], lo: f64, hi: f64) -> f64 {
        let mut all: Vec<f64> = vals.to_vec();
        all.push(lo);
        all.push(hi);
        let mut best: f64 = 0.0;
        for &a in &all {
            // smallest value strictly above a, or a itself for the maximum
            let next = all.iter().copied().filter(|&b| b > a).fold(f64::INFINITY, f64::min);
            if next.is_finite() {
                best = best.max(next - a);
            }
        }
        best
    }

    fn brute_stats(pts: &[Vec<f64>], d: usize, delta: f64) -> RegionStats {
        let dp = delta.min(0.5);
        let in_rk = |p: &Vec<f64>, k: usize| (0..d).all(|o| o == k || p[k] >= p[o]);
        let in_rpair = |p: &Vec<f64>, a: usize, b: usize| {
            p[a] >= dp && (0..d).all(|o| o == a || o == b || p[a] >= p[o])
        };
        let in_hat = |p: &Vec<f64>, a: usize, b: usize| {
            p[a] >= p[b] - delta && (0..d).all(|o| o == a || o == b || p[a] >= p[o])
        };
        let in_slab = |p: &Vec<f64>, k: usize| (0..d).all(|o| o == k || p[o] <= delta);
        let mut pairs = Vec::new();
        for a in 0..d {
            for b in 0..d {
                if a != b {
                    pairs.push((a, b));
                }
            }
        }
        let proj = |f: &dyn Fn(&Vec<f64>) -> bool, g: &dyn Fn(&Vec<f64>) -> f64| -> Vec<f64> {
            pts.iter().filter(|p| f(p)).map(g).collect()
        };
        RegionStats {
            delta,
            v: (0..d)
                .map(|k| brute_gap(&proj(&|p| in_rk(p, k), &|p| p[k]), 0.0, 1.0))
                .collect(),
            vpair: pairs
                .iter()
                .map(|&(a, b)| brute_gap(&proj(&|p| in_rpair(p, a, b), &|p| p[a] - p[b]), -1.0 + dp, 1.0))
                .collect(),
            vtilde: (0..d)
                .map(|k| brute_gap(&proj(&|p| in_slab(p, k), &|p| p[k]), 0.0, 1.0))
                .collect(),
            npair: pairs.iter().map(|&(a, b)| pts.iter().filter(|p| in_hat(p, a, b)).count()).collect(),
            pairs,
        }
    }

    fn cloud_strategy() -> impl Strategy<Value = (usize, Vec<Vec<f64>>, f64)> {
        (1usize..=3).prop_flat_map(|d| {
            (
                Just(d),
                prop::collection::vec(prop::collection::vec(0.0f64..=1.0, d), 0..=50),
                0.0f64..=1.0,
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn matches_brute_force_scan((d, pts, delta) in cloud_strategy()) {
            let fast = region_statistics(&PointCloud::new(d, pts.clone()).unwrap(), delta).unwrap();
            prop_assert_eq!(fast, brute_stats(&pts, d, delta));
        }

        #[test]
        fn adding_a_point_never_widens_gaps(
            (d, pts, delta) in cloud_strategy(),
            extra in prop::collection::vec(0.0f64..=1.0, 3),
        ) {
            let before = region_statistics(&PointCloud::new(d, pts.clone()).unwrap(), delta).unwrap();
            let mut more = pts;
            more.push(extra[..d].to_vec());
            let after = region_statistics(&PointCloud::new(d, more).unwrap(), delta).unwrap();
            for (a, b) in after.v.iter().zip(&before.v) { prop_assert!(a <= b); }
            for (a, b) in after.vpair.iter().zip(&before.vpair) { prop_assert!(a <= b); }
            for (a, b) in after.vtilde.iter().zip(&before.vtilde) { prop_assert!(a <= b); }
        }

        #[test]
        fn full_slab_is_whole_cloud_gap((d, pts, _delta) in cloud_strategy()) {
            let s = region_statistics(&PointCloud::new(d, pts.clone()).unwrap(), 1.0).unwrap();
            for k in 0..d {
                let col: Vec<f64> = pts.iter().map(|p| p[k]).collect();
                prop_assert_eq!(s.vtilde[k], brute_gap(&col, 0.0, 1.0));
            }
        }
    }
}
