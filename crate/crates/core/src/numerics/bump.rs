//! The flat bump `b(u) = exp(-1/(u(1-u)))` and the smooth step built from it.
//!
//! `S(x) = int_0^x b / int_0^1 b` is C-infinity, equals 0 for `x <= 0` and 1 for
//! `x >= 1`, and every derivative vanishes at both ends. It drives the time
//! reparametrisation and every spatial cutoff.

use std::sync::OnceLock;

use super::quad::{gauss_legendre, integrate};

const TABLE: usize = 4096;
const EDGE_CELLS: usize = 64;

pub fn bump(u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        0.0
    } else {
        (-1.0 / (u * (1.0 - u))).exp()
    }
}

/// Derivative of the bump.
pub fn bump_prime(u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        0.0
    } else {
        let q = u * (1.0 - u);
        bump(u) * (1.0 - 2.0 * u) / (q * q)
    }
}

struct StepTable {
    norm: f64,
    values: Vec<f64>,
}

fn table() -> &'static StepTable {
    static T: OnceLock<StepTable> = OnceLock::new();
    T.get_or_init(|| {
        let rule = gauss_legendre(12);
        let h = 1.0 / TABLE as f64;
        let mut values = vec![0.0; TABLE + 1];
        for i in 0..TABLE {
            let a = i as f64 * h;
            values[i + 1] = values[i] + integrate(bump, a, a + h, 1, &rule);
        }
        let norm = values[TABLE];
        values.iter_mut().for_each(|v| *v /= norm);
        StepTable { norm, values }
    })
}

/// `int_0^1 b(u) du`.
pub fn bump_integral() -> f64 {
    table().norm
}

/// The smooth step `S(x)`: cubic Hermite interpolation of a fine table, with
/// direct quadrature in the flat edge cells. The upper half uses `S(x) = 1 - S(1 - x)`.
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    if x > 0.5 {
        return 1.0 - lower_step(1.0 - x);
    }
    lower_step(x)
}

fn lower_step(x: f64) -> f64 {
    let t = table();
    let h = 1.0 / TABLE as f64;
    let u = x / h;
    let i = (u.floor() as usize).min(TABLE - 1);
    if i < EDGE_CELLS {
        // The bump is too flat here for a cubic; quadrature keeps S monotone.
        static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
        let rule = RULE.get_or_init(|| gauss_legendre(12));
        let a = i as f64 * h;
        return t.values[i] + integrate(bump, a, x, 1, rule) / t.norm;
    }
    let s = u - i as f64;
    let (x0, x1) = (i as f64 * h, (i + 1) as f64 * h);
    let (y0, y1) = (t.values[i], t.values[i + 1]);
    let (d0, d1) = (bump(x0) / t.norm * h, bump(x1) / t.norm * h);
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * d0 + (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * d1
}

/// `S'(x)`.
pub fn smooth_step_prime(x: f64) -> f64 {
    bump(x) / table().norm
}

/// `S''(x)`.
pub fn smooth_step_second(x: f64) -> f64 {
    bump_prime(x) / table().norm
}

/// Even plateau cutoff: 1 for `|z| <= inner`, 0 for `|z| >= outer`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plateau {
    pub inner: f64,
    pub outer: f64,
}

impl Plateau {
    pub fn new(inner: f64, outer: f64) -> Self {
        assert!(0.0 <= inner && inner < outer);
        Plateau { inner, outer }
    }

    pub fn value(&self, z: f64) -> f64 {
        1.0 - smooth_step((z.abs() - self.inner) / (self.outer - self.inner))
    }

    pub fn derivative(&self, z: f64) -> f64 {
        let w = self.outer - self.inner;
        -smooth_step_prime((z.abs() - self.inner) / w) / w * z.signum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_is_normalised_and_symmetric() {
        assert_eq!(smooth_step(0.0), 0.0);
        assert_eq!(smooth_step(1.0), 1.0);
        for &x in &[0.1, 0.3, 0.4999, 0.77] {
            assert!((smooth_step(x) + smooth_step(1.0 - x) - 1.0).abs() < 1e-13);
        }
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn step_matches_direct_quadrature() {
        let r = gauss_legendre(20);
        for &x in &[0.05, 0.21, 0.63, 0.9] {
            let direct = integrate(bump, 0.0, x, 64, &r) / bump_integral();
            assert!((smooth_step(x) - direct).abs() < 1e-13, "x={x}");
        }
        assert!((bump_integral() - 0.007029858406609).abs() < 1e-12);
    }

    #[test]
    fn plateau_derivative_matches_difference() {
        let p = Plateau::new(0.6, 0.95);
        for &z in &[-0.8, 0.7, 0.9] {
            let d = (p.value(z + 1e-6) - p.value(z - 1e-6)) / 2e-6;
            assert!((d - p.derivative(z)).abs() < 1e-6);
        }
        assert_eq!(p.value(0.3), 1.0);
        assert_eq!(p.value(0.96), 0.0);
    }
}
