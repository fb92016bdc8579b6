//! Log-log rate fitting for gap-vs-n sweeps.

use anyhow::{bail, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Points dropped because their gap was zero or negative.
    pub dropped: usize,
}

/// Least-squares fit of `log(gap)` on `log(n)`. Points with
/// nonpositive gaps are dropped (and counted); at least 3 usable points
/// are required.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Result<RateFit> {
    if points.iter().any(|&(n, _)| n <= 0.0) {
        bail!("all n must be positive");
    }
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(_, gap)| gap > 0.0)
        .map(|&(n, gap)| (n.ln(), gap.ln()))
        .collect();
    let dropped = points.len() - usable.len();
    if usable.len() < 3 {
        bail!(
            "insufficient points: need at least 3 with positive gaps, got {}",
            usable.len()
        );
    }
    let m = usable.len() as f64;
    let mean_x: f64 = usable.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_y: f64 = usable.iter().map(|p| p.1).sum::<f64>() / m;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for &(x, y) in &usable {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
        syy += (y - mean_y) * (y - mean_y);
    }
    if sxx == 0.0 {
        bail!("all n coincide; cannot fit a slope");
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = usable
        .iter()
        .map(|&(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
        dropped,
    })
}

/// Median of a slice (average of the middle pair for even lengths).
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of empty slice");
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("median of NaN"));
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    }
}
