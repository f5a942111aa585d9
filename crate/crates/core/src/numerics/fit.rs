//! Least-squares line fits used for scaling and convergence slopes.

/// Slope of the least-squares line through `(x, y)`.
pub fn slope(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2);
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Slope of `log y` against `log x`, both natural logs.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    slope(&lx, &ly)
}

/// Exponent `p` in `y ~ base^(p n)` over integer levels `n`.
pub fn level_slope(levels: &[f64], y: &[f64], base: f64) -> f64 {
    let ly: Vec<f64> = y.iter().map(|v| v.ln() / base.ln()).collect();
    slope(levels, &ly)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_power_law() {
        let x = [1e-1, 1e-2, 1e-3, 1e-4];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(1.5)).collect();
        assert!((loglog_slope(&x, &y) - 1.5).abs() < 1e-12);
        let n = [0.0, 1.0, 2.0, 3.0];
        let z: Vec<f64> = n.iter().map(|k: &f64| 5f64.powf(-0.5 * k)).collect();
        assert!((level_slope(&n, &z, 5.0) + 0.5).abs() < 1e-12);
    }
}
