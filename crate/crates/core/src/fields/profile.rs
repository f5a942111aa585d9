use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numerics::bump::Plateau;
use crate::numerics::quad::{gauss_legendre, integrate};

/// Transverse scalar profile and the cutoffs shaping the velocity field.
///
/// `theta_bar(z) = c sin(2 pi z) exp(-1 / (1/4 - z^2))` on `(-1/2, 1/2)`:
/// odd, so every block field has zero mean, and flat at the ends.
#[derive(Debug, Clone, PartialEq)]
pub struct CutoffProfile {
    c1: f64,
    /// Transverse velocity cutoff in `z = y / r`.
    pub velocity_y: Plateau,
    /// Longitudinal velocity cutoff in `(s - L/2) / L`, open curves only.
    pub velocity_s: Option<Plateau>,
    /// Longitudinal taper of the scalar, open curves only.
    pub scalar_s: Option<Plateau>,
}

fn raw_profile(z: f64) -> f64 {
    let q = 0.25 - z * z;
    if q <= 0.0 {
        0.0
    } else {
        (2.0 * PI * z).sin() * (-1.0 / q).exp()
    }
}

fn raw_profile_prime(z: f64) -> f64 {
    let q = 0.25 - z * z;
    if q <= 0.0 {
        return 0.0;
    }
    let e = (-1.0 / q).exp();
    2.0 * PI * (2.0 * PI * z).cos() * e + (2.0 * PI * z).sin() * e * (-2.0 * z / (q * q))
}

/// Profile for tubes around closed (`open = false`) or open curves.
///
/// `smoothness_order` is the number of derivatives that must vanish at the
/// support edge; the exponential profile is flat to all orders, so any value
/// of at least 6 is accepted.
pub fn build_cutoff(smoothness_order: usize, open: bool) -> Result<CutoffProfile> {
    if smoothness_order < 6 {
        return Err(Error::Fields(format!("cutoff needs at least 6 flat derivatives, asked for {smoothness_order}")));
    }
    let rule = gauss_legendre(20);
    let norm = integrate(|z| raw_profile(z).powi(2), -0.5, 0.5, 64, &rule);
    Ok(CutoffProfile {
        c1: 1.0 / norm.sqrt(),
        velocity_y: Plateau::new(0.6, 0.95),
        velocity_s: open.then(|| Plateau::new(0.40, 0.48)),
        scalar_s: open.then(|| Plateau::new(0.28, 0.38)),
    })
}

impl CutoffProfile {
    pub fn theta_bar(&self, z: f64) -> f64 {
        self.c1 * raw_profile(z)
    }

    pub fn theta_bar_prime(&self, z: f64) -> f64 {
        self.c1 * raw_profile_prime(z)
    }

    /// `int theta_s(s)^2 ds` over `[0, L]`.
    pub fn scalar_s_l2(&self, param_len: f64) -> f64 {
        match self.scalar_s {
            None => param_len,
            Some(p) => {
                let rule = gauss_legendre(20);
                param_len * integrate(|u| p.value(u).powi(2), -0.5, 0.5, 64, &rule)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_is_odd_and_normalised() {
        let p = build_cutoff(6, false).unwrap();
        let rule = gauss_legendre(20);
        let m = integrate(|z| p.theta_bar(z), -0.5, 0.5, 64, &rule);
        let n = integrate(|z| p.theta_bar(z).powi(2), -0.5, 0.5, 64, &rule);
        assert!(m.abs() < 1e-14);
        assert!((n - 1.0).abs() < 1e-10);
    }

    #[test]
    fn profile_is_flat_at_the_edges() {
        let p = build_cutoff(6, true).unwrap();
        let h = 1e-3;
        for &z in &[-0.5, 0.5] {
            for k in -3i32..=3 {
                assert!(p.theta_bar(z + k as f64 * h).abs() < 1e-8);
            }
        }
        let d = (p.theta_bar(0.2 + 1e-6) - p.theta_bar(0.2 - 1e-6)) / 2e-6;
        assert!((d - p.theta_bar_prime(0.2)).abs() < 1e-5 * d.abs().max(1.0));
    }

    #[test]
    fn low_order_request_is_rejected() {
        assert!(build_cutoff(3, false).is_err());
    }
}
