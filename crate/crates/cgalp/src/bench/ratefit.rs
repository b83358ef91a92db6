//! Log-log slope fitting for empirical convergence rates.

use serde::Serialize;

use crate::error::Error;
use crate::Result;

/// Least-squares line through `(log k, log value)` over a k-window.
#[derive(Debug, Clone, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub k_range: (usize, usize),
    /// Rows in range dropped because the value was not positive.
    pub excluded: usize,
}

/// Fit `log v = slope * log k + intercept` on the rows with
/// `k_lo <= k <= k_hi` and positive values. Rows with nonpositive or
/// non-finite values are excluded and counted; fewer than 10 usable
/// points is an error.
pub fn fit_rate(rows: &[(usize, f64)], k_lo: usize, k_hi: usize) -> Result<RateFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut excluded = 0usize;
    for &(k, v) in rows {
        if k < k_lo || k > k_hi || k == 0 {
            continue;
        }
        if v > 0.0 && v.is_finite() {
            xs.push((k as f64).ln());
            ys.push(v.ln());
        } else {
            excluded += 1;
        }
    }
    let n = xs.len();
    if n < 10 {
        return Err(Error::InvalidInput(format!(
            "rate fit needs at least 10 usable points in [{k_lo}, {k_hi}], found {n} \
             ({excluded} excluded as nonpositive)"
        )));
    }
    let nf = n as f64;
    let mean_x = xs.iter().sum::<f64>() / nf;
    let mean_y = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    let syy: f64 = ys.iter().map(|y| (y - mean_y).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    Ok(RateFit { slope, intercept, r_squared, k_range: (k_lo, k_hi), excluded })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(f: impl Fn(f64) -> f64, k_lo: usize, k_hi: usize) -> Vec<(usize, f64)> {
        (k_lo..=k_hi).map(|k| (k, f(k as f64))).collect()
    }

    #[test]
    fn exact_power_laws() {
        let fit = fit_rate(&curve(|k| 7.0 / k, 10, 1000), 10, 1000).unwrap();
        assert!((fit.slope + 1.0).abs() < 1e-6, "{}", fit.slope);
        assert!((fit.intercept - 7f64.ln()).abs() < 1e-6);
        assert!(fit.r_squared > 1.0 - 1e-9);

        let fit = fit_rate(&curve(|k| 3.0 / k.sqrt(), 10, 1000), 10, 1000).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-6);
    }

    #[test]
    fn log_decay_looks_flat() {
        let rows = curve(|k| 1.0 / (k + 2.0).ln(), 1000, 100_000);
        let fit = fit_rate(&rows, 1000, 100_000).unwrap();
        assert!(fit.slope > -0.2 && fit.slope < 0.0, "{}", fit.slope);
    }

    #[test]
    fn nonpositive_rows_excluded() {
        let mut rows = curve(|k| 1.0 / k, 1, 100);
        rows[4].1 = 0.0;
        rows[10].1 = -3.0;
        rows[20].1 = f64::INFINITY;
        let fit = fit_rate(&rows, 1, 100).unwrap();
        assert_eq!(fit.excluded, 3);
        assert!((fit.slope + 1.0).abs() < 0.05);
    }

    #[test]
    fn too_few_points_is_an_error() {
        let rows = curve(|k| 1.0 / k, 1, 9);
        assert!(fit_rate(&rows, 1, 9).is_err());
    }

    #[test]
    fn window_is_respected() {
        let rows = curve(|k| if k < 50.0 { 1000.0 } else { 5.0 / k }, 1, 500);
        let fit = fit_rate(&rows, 50, 500).unwrap();
        assert!((fit.slope + 1.0).abs() < 1e-6);
    }
}
