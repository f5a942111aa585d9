use rustfft::num_complex::Complex64;
use serde::Serialize;

use super::fft::Fft2;
use crate::error::{Error, Result};
use crate::grid::GridField;

/// Fourier coefficients of a real scalar field on the torus.
///
/// Grid samples sit at cell centres, so coefficients carry a fixed phase
/// `e^{-i pi (kx + ky)/n}` relative to the continuous ones. Norms and
/// derivatives do not see it.
#[derive(Debug, Clone)]
pub struct SpectralField {
    pub coeffs: Vec<Complex64>,
    n: usize,
}

impl SpectralField {
    pub fn from_grid(fft: &Fft2, g: &GridField, comp: usize) -> Result<Self> {
        if g.res() != fft.n() {
            return Err(Error::Solver(format!("grid {} does not match FFT size {}", g.res(), fft.n())));
        }
        Ok(SpectralField { coeffs: fft.forward(g.comp(comp)), n: fft.n() })
    }

    pub fn from_coeffs(fft: &Fft2, coeffs: Vec<Complex64>) -> Self {
        assert_eq!(coeffs.len(), fft.spectrum_len());
        SpectralField { coeffs, n: fft.n() }
    }

    pub fn to_grid(&self, fft: &Fft2) -> GridField {
        GridField::from_data(self.n, 1, fft.inverse(&self.coeffs)).expect("square grid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    /// `sum w(k) m(k) |c_k|^2` over the half plane.
    fn weighted_sum(&self, fft: &Fft2, m: impl Fn([f64; 2]) -> f64) -> f64 {
        self.coeffs.iter().enumerate().map(|(i, c)| fft.weight(i) * m(fft.wavevector(i)) * c.norm_sqr()).sum()
    }

    pub fn l2_sq(&self, fft: &Fft2) -> f64 {
        self.weighted_sum(fft, |_| 1.0)
    }

    /// `||grad f||^2_{L^2}`.
    pub fn grad_l2_sq(&self, fft: &Fft2) -> f64 {
        self.weighted_sum(fft, |k| k[0] * k[0] + k[1] * k[1])
    }

    /// `(sum_{k != 0} |k|^{-2} |c_k|^2)^{1/2}`, for fields of zero mean.
    pub fn h_minus1_norm(&self, fft: &Fft2) -> Result<f64> {
        let scale = self.l2_sq(fft).sqrt().max(1.0);
        if self.mean().abs() > 1e-8 * scale {
            return Err(Error::Solver(format!("negative Sobolev norm needs zero mean, got {:.3e}", self.mean())));
        }
        Ok(self
            .weighted_sum(fft, |k| {
                let q = k[0] * k[0] + k[1] * k[1];
                if q == 0.0 {
                    0.0
                } else {
                    1.0 / q
                }
            })
            .sqrt())
    }

    /// L2 norm of the sharp truncation to `|k| <= cutoff`, with angular `|k|`.
    pub fn low_freq_mass(&self, fft: &Fft2, cutoff: f64) -> f64 {
        let c2 = cutoff * cutoff;
        self.weighted_sum(fft, |k| if k[0] * k[0] + k[1] * k[1] <= c2 { 1.0 } else { 0.0 }).sqrt()
    }

    /// Split into `|k| <= cutoff` and `|k| > cutoff` parts.
    pub fn split(&self, fft: &Fft2, cutoff: f64) -> (SpectralField, SpectralField) {
        let c2 = cutoff * cutoff;
        let mut lo = self.clone();
        let mut hi = self.clone();
        for i in 0..self.coeffs.len() {
            let k = fft.wavevector(i);
            if k[0] * k[0] + k[1] * k[1] <= c2 {
                hi.coeffs[i] = Complex64::new(0.0, 0.0);
            } else {
                lo.coeffs[i] = Complex64::new(0.0, 0.0);
            }
        }
        (lo, hi)
    }

    /// Bernstein check on the high band: `(||grad P_{>K} f||, K ||P_{>K} f||)`.
    pub fn bernstein(&self, fft: &Fft2, cutoff: f64) -> BernsteinCheck {
        let (_, hi) = self.split(fft, cutoff);
        BernsteinCheck { cutoff, grad_high: hi.grad_l2_sq(fft).sqrt(), scaled_high: cutoff * hi.l2_sq(fft).sqrt() }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BernsteinCheck {
    pub cutoff: f64,
    pub grad_high: f64,
    pub scaled_high: f64,
}

impl BernsteinCheck {
    pub fn holds(&self) -> bool {
        self.grad_high >= self.scaled_high * (1.0 - 1e-12)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn mode(n: usize, kx: f64, ky: f64) -> GridField {
        GridField::from_fn(n, |x| (2.0 * PI * (kx * x[0] + ky * x[1])).sin())
    }

    #[test]
    fn single_mode_norms() {
        let fft = Fft2::new(32).unwrap();
        let f = SpectralField::from_grid(&fft, &mode(32, 1.0, 0.0), 0).unwrap();
        assert!((f.l2_sq(&fft) - 0.5).abs() < 1e-14);
        // sin has two exponentials of weight 1/2 each; |k| = 2 pi.
        assert!((f.h_minus1_norm(&fft).unwrap() - 0.5f64.sqrt() / (2.0 * PI)).abs() < 1e-14);
        assert!((f.grad_l2_sq(&fft) - 0.5 * 4.0 * PI * PI).abs() < 1e-10);
    }

    #[test]
    fn projection_splits_energy() {
        let fft = Fft2::new(32).unwrap();
        let g = GridField::from_fn(32, |x| (2.0 * PI * x[0]).sin() + 0.3 * (2.0 * PI * (5.0 * x[0] + 2.0 * x[1])).cos());
        let f = SpectralField::from_grid(&fft, &g, 0).unwrap();
        let (lo, hi) = f.split(&fft, 2.0 * PI * 3.0);
        assert!((lo.l2_sq(&fft) + hi.l2_sq(&fft) - f.l2_sq(&fft)).abs() < 1e-14);
        assert!((lo.l2_sq(&fft) - 0.5).abs() < 1e-14);
        assert!(f.bernstein(&fft, 2.0 * PI * 3.0).holds());
        assert!((f.low_freq_mass(&fft, 1e9) - f.l2_sq(&fft).sqrt()).abs() < 1e-14);
        assert!(f.low_freq_mass(&fft, 0.0) < 1e-15);
    }

    #[test]
    fn nonzero_mean_is_rejected() {
        let fft = Fft2::new(16).unwrap();
        let g = GridField::from_fn(16, |x| 1.0 + x[0].sin());
        assert!(SpectralField::from_grid(&fft, &g, 0).unwrap().h_minus1_norm(&fft).is_err());
    }
}
