use crate::error::{Error, Result};

const SERIES_CUTOFF: f64 = 1e-8;

/// Root of `beta - kappa beta^2 / 2 = y / l` on the branch through `beta = 0`.
///
/// Uses the rationalised form `2(y/l) / (1 + sqrt(1 - 2 kappa y / l))`, which
/// equals `(1 - sqrt(1 - 2 kappa y / l)) / kappa` without the cancellation;
/// tiny curvature switches to the two-term series. Returns NaN off the domain.
pub fn beta(kappa: f64, l: f64, y: f64) -> f64 {
    let a = y / l;
    if kappa.abs() < SERIES_CUTOFF {
        return a + 0.5 * kappa * a * a;
    }
    let d = 1.0 - 2.0 * kappa * a;
    if d <= 0.0 {
        return f64::NAN;
    }
    2.0 * a / (1.0 + d.sqrt())
}

/// Outcome of the perturbative solve for `beta_tilde - beta`.
#[derive(Debug, Clone, Copy)]
pub struct BetaSolve {
    pub delta_beta: f64,
    pub iterations: usize,
}

/// Solve for `delta beta` given perturbed curvature and speed by iterating
/// `delta beta = (beta^2 dk / 2 + y d(1/l) + Q / 2) / (1 - kappa beta)` with
/// `Q = 2 beta dbeta dk + kappa dbeta^2 + dk dbeta^2`.
pub fn beta_fixed_point(kappa: f64, l: f64, kappa_t: f64, l_t: f64, y: f64) -> Result<BetaSolve> {
    let b = beta(kappa, l, y);
    let dk = kappa_t - kappa;
    let dinv = 1.0 / l_t - 1.0 / l;
    let denom = 1.0 - kappa * b;
    let mut db = 0.0;
    for it in 1..=200 {
        let q = 2.0 * b * db * dk + kappa * db * db + dk * db * db;
        let next = (0.5 * b * b * dk + y * dinv + 0.5 * q) / denom;
        let done = (next - db).abs() <= 1e-16 * (1.0 + b.abs());
        db = next;
        if done {
            return Ok(BetaSolve { delta_beta: db, iterations: it });
        }
        if !db.is_finite() {
            break;
        }
    }
    Err(Error::Map("beta fixed point did not contract".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straight_line_is_identity() {
        assert_eq!(beta(0.0, 1.0, 0.3), 0.3);
        assert_eq!(beta(0.0, 2.0, 0.3), 0.15);
    }

    #[test]
    fn circle_beta_matches_closed_form() {
        for &(k, l, y) in &[(2.0, 1.0, 0.1), (-3.0, 0.5, 0.04), (5.0, 1.0, -0.05), (1e-9, 1.0, 0.2)] {
            let b = beta(k, l, y);
            assert!((b - 0.5 * k * b * b - y / l).abs() < 1e-15);
            if k.abs() > 1e-8 {
                let direct = (1.0 - (1.0 - 2.0 * k * y / l).sqrt()) / k;
                assert!((b - direct).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn fixed_point_matches_direct_solution() {
        let (k, l, y) = (2.0, 1.0, 0.08);
        for &e in &[1e-2, 1e-4, 1e-6] {
            let (kt, lt) = (k + 3.0 * e, l - e);
            let s = beta_fixed_point(k, l, kt, lt, y).unwrap();
            let direct = beta(kt, lt, y) - beta(k, l, y);
            assert!((s.delta_beta - direct).abs() < 1e-10 * beta(k, l, y).abs(), "e={e}");
            assert!((s.delta_beta - direct).abs() < 1e-6 * direct.abs(), "e={e}");
        }
    }

    #[test]
    fn off_domain_is_nan() {
        assert!(beta(10.0, 1.0, 0.06).is_nan());
    }
}
