//! Dense Hungarian algorithm (potentials form) for rectangular assignment.
//!
//! Free matching is reduced to assignment with weights `max(value, 0)`;
//! assigned pairs of non-positive value are dropped by the caller.

use crate::market::MarketRealization;

/// Minimum-cost assignment of every row to a distinct column; requires
/// `rows <= cols`. Returns the column of each row.
fn assign(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    let m = cost[0].len();
    debug_assert!(n <= m);
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    // p[j]: row (1-based) assigned to column j; p[0] is the row being added.
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_to_col = vec![0; n];
    for j in 1..=m {
        if p[j] != 0 {
            row_to_col[p[j] - 1] = j - 1;
        }
    }
    row_to_col
}

pub(super) fn solve(real: &MarketRealization) -> Vec<(usize, usize)> {
    let (n_l, n_e) = (real.n_workers(), real.n_employers());
    let gain = |i: usize, j: usize| -real.value(i, j).max(0.0);
    if n_l <= n_e {
        let cost: Vec<Vec<f64>> = (0..n_l).map(|i| (0..n_e).map(|j| gain(i, j)).collect()).collect();
        assign(&cost).into_iter().enumerate().collect()
    } else {
        let cost: Vec<Vec<f64>> = (0..n_e).map(|j| (0..n_l).map(|i| gain(i, j)).collect()).collect();
        assign(&cost)
            .into_iter()
            .enumerate()
            .map(|(j, i)| (i, j))
            .collect()
    }
}
