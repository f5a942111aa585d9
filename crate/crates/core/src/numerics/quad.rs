//! Gauss-Legendre rules and periodic trapezoid sums.

use std::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Composite Gauss-Legendre integral of `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize, rule: &(Vec<f64>, Vec<f64>)) -> f64 {
    let h = (b - a) / panels as f64;
    let mut s = 0.0;
    for p in 0..panels {
        let c = a + (p as f64 + 0.5) * h;
        for (xi, wi) in rule.0.iter().zip(&rule.1) {
            s += wi * f(c + 0.5 * h * xi);
        }
    }
    0.5 * h * s
}

/// Trapezoid sum with spacing `h`; `periodic` drops the duplicated end weight.
pub fn trapezoid(f: &[f64], h: f64, periodic: bool) -> f64 {
    let s: f64 = f.iter().sum();
    if periodic || f.len() < 2 {
        s * h
    } else {
        (s - 0.5 * (f[0] + f[f.len() - 1])) * h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_rule_integrates_high_degree() {
        let r = gauss_legendre(10);
        let v = integrate(|x| x.powi(18), -1.0, 1.0, 1, &r);
        assert!((v - 2.0 / 19.0).abs() < 1e-14);
        assert!((r.1.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let r1 = gauss_legendre(1);
        assert!(r1.0[0].abs() < 1e-15 && (r1.1[0] - 2.0).abs() < 1e-15);
    }
}
