//! Small statistical helpers shared by the estimators.

/// Ordinary least-squares slope of `y` on `x`.
pub fn ols_slope(points: &[(f64, f64)]) -> f64 {
    let w: Vec<f64> = vec![1.0; points.len()];
    weighted_line(points, &w).slope
}

/// Weighted least-squares line `y = intercept + slope · x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    pub intercept: f64,
    pub slope: f64,
    /// Standard errors assuming the weights are inverse variances.
    pub intercept_se: f64,
    pub slope_se: f64,
}

pub fn weighted_line(points: &[(f64, f64)], weights: &[f64]) -> Line {
    debug_assert_eq!(points.len(), weights.len());
    let sw: f64 = weights.iter().sum();
    let mx = points.iter().zip(weights).map(|((x, _), w)| w * x).sum::<f64>() / sw;
    let my = points.iter().zip(weights).map(|((_, y), w)| w * y).sum::<f64>() / sw;
    let sxx: f64 = points.iter().zip(weights).map(|((x, _), w)| w * (x - mx).powi(2)).sum();
    let sxy: f64 = points
        .iter()
        .zip(weights)
        .map(|((x, y), w)| w * (x - mx) * (y - my))
        .sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    Line {
        intercept,
        slope,
        intercept_se: (1.0 / sw + mx * mx / sxx).sqrt(),
        slope_se: (1.0 / sxx).sqrt(),
    }
}

/// Wilson score interval for `k` successes out of `n` at normal quantile `z`.
/// Returns `(center, half_width)`.
pub fn wilson(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    (center, half)
}

/// Linear-interpolation quantile (type 7) of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    let h = (n - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator).
pub fn std_dev(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let pts: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 3.0 - 0.5 * i as f64)).collect();
        let l = weighted_line(&pts, &[1.0; 10]);
        assert!((l.slope + 0.5).abs() < 1e-14);
        assert!((l.intercept - 3.0).abs() < 1e-13);
    }

    #[test]
    fn wilson_known() {
        let (c, h) = wilson(50, 100, 1.96);
        assert!((c - 0.5).abs() < 1e-12);
        assert!((h - 0.0961).abs() < 1e-3);
        let (c, h) = wilson(0, 10, 1.96);
        assert!(c > 0.0 && c - h <= 1e-12);
    }

    #[test]
    fn quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&v, 0.0), 1.0);
        assert_eq!(quantile_sorted(&v, 1.0), 4.0);
        assert_eq!(quantile_sorted(&v, 0.5), 2.5);
    }
}
