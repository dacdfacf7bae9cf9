use serde::{Deserialize, Serialize};

/// Ordinary least squares fit of `ln y = intercept + slope * ln x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    /// Needs at least three points.
    pub slope_stderr: Option<f64>,
    pub points: usize,
}

/// Fits on the points with positive coordinates; `None` with fewer than two
/// such points or no spread in `x`.
pub fn fit_loglog(points: &[(f64, f64)]) -> Option<Fit> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let m = logs.len();
    if m < 2 {
        return None;
    }
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / m as f64;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / m as f64;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_stderr = (m >= 3).then(|| {
        let ssr: f64 = logs
            .iter()
            .map(|p| {
                let r = p.1 - intercept - slope * p.0;
                r * r
            })
            .sum();
        (ssr / (m - 2) as f64 / sxx).sqrt()
    });
    Some(Fit {
        slope,
        intercept,
        slope_stderr,
        points: m,
    })
}
