//! Real two-dimensional FFT on the unit torus.
//!
//! Spectra are stored column-major in the half plane: index `kx * n + ky` with
//! `kx in 0..=n/2` and `ky in 0..n` (wrapped). Forward transforms divide by `n^2`,
//! so a coefficient is the Fourier coefficient `int f e^{-2 pi i k.x} dx`.

use std::sync::Arc;

use rayon::prelude::*;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

#[derive(Clone)]
pub struct Fft2 {
    n: usize,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Fft2({})", self.n)
    }
}

impl Fft2 {
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::Solver(format!("FFT size {n} must be even and at least 4")));
        }
        let mut rp = RealFftPlanner::<f64>::new();
        let mut cp = FftPlanner::<f64>::new();
        Ok(Fft2 {
            n,
            r2c: rp.plan_fft_forward(n),
            c2r: rp.plan_fft_inverse(n),
            fwd: cp.plan_fft_forward(n),
            inv: cp.plan_fft_inverse(n),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of stored half-plane columns, `n/2 + 1`.
    pub fn half(&self) -> usize {
        self.n / 2 + 1
    }

    pub fn spectrum_len(&self) -> usize {
        self.half() * self.n
    }

    /// Row-major real samples to half-plane coefficients.
    pub fn forward(&self, data: &[f64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.spectrum_len()];
        self.forward_into(data, &mut out);
        out
    }

    pub fn forward_into(&self, data: &[f64], out: &mut [Complex64]) {
        let (n, h) = (self.n, self.half());
        assert_eq!(data.len(), n * n);
        let mut rows = vec![Complex64::new(0.0, 0.0); n * h];
        rows.par_chunks_mut(h).zip(data.par_chunks(n)).for_each_init(
            || (self.r2c.make_input_vec(), self.r2c.make_scratch_vec()),
            |(buf, scratch), (dst, src)| {
                buf.copy_from_slice(src);
                self.r2c.process_with_scratch(buf, dst, scratch).expect("row transform");
            },
        );
        let scale = 1.0 / (n * n) as f64;
        out.par_chunks_mut(n).enumerate().for_each_init(
            || vec![Complex64::new(0.0, 0.0); self.fwd.get_inplace_scratch_len()],
            |scratch, (kx, col)| {
                for (ky, c) in col.iter_mut().enumerate() {
                    *c = rows[ky * h + kx];
                }
                self.fwd.process_with_scratch(col, scratch);
                col.iter_mut().for_each(|c| *c *= scale);
            },
        );
    }

    /// Half-plane coefficients back to row-major real samples.
    pub fn inverse(&self, spec: &[Complex64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n * self.n];
        self.inverse_into(spec, &mut out);
        out
    }

    pub fn inverse_into(&self, spec: &[Complex64], out: &mut [f64]) {
        let (n, h) = (self.n, self.half());
        assert_eq!(spec.len(), n * h);
        let mut cols = spec.to_vec();
        cols.par_chunks_mut(n).for_each_init(
            || vec![Complex64::new(0.0, 0.0); self.inv.get_inplace_scratch_len()],
            |scratch, col| self.inv.process_with_scratch(col, scratch),
        );
        out.par_chunks_mut(n).enumerate().for_each_init(
            || (self.c2r.make_input_vec(), self.c2r.make_scratch_vec()),
            |(buf, scratch), (ky, row)| {
                for (kx, b) in buf.iter_mut().enumerate() {
                    *b = cols[kx * n + ky];
                }
                // The DC and Nyquist entries of a real row carry no imaginary part.
                buf[0].im = 0.0;
                buf[h - 1].im = 0.0;
                self.c2r.process_with_scratch(buf, row, scratch).expect("row transform");
            },
        );
    }

    /// Signed integer wavenumber of row index `ky`.
    #[inline]
    pub fn signed(&self, k: usize) -> i64 {
        if k <= self.n / 2 {
            k as i64
        } else {
            k as i64 - self.n as i64
        }
    }

    /// Angular wavenumber `2 pi (kx, ky)` of spectral index `idx`.
    #[inline]
    pub fn wavevector(&self, idx: usize) -> [f64; 2] {
        let (kx, ky) = (idx / self.n, idx % self.n);
        let tp = 2.0 * std::f64::consts::PI;
        [tp * kx as f64, tp * self.signed(ky) as f64]
    }

    /// Weight of a half-plane coefficient in Parseval sums (1 on the self-conjugate
    /// columns, 2 elsewhere).
    #[inline]
    pub fn weight(&self, idx: usize) -> f64 {
        let kx = idx / self.n;
        if kx == 0 || kx == self.n / 2 {
            1.0
        } else {
            2.0
        }
    }

    /// Coefficients of a coarser grid's spectrum on this grid, zero-padded.
    ///
    /// Samples sit at cell centres, so each mode picks up the phase
    /// `e^{i pi (kx + ky) (1/n - 1/n_c)}`. The coarse Nyquist modes are dropped.
    pub fn prolong(&self, coarse: &Fft2, c: &[Complex64]) -> Result<Vec<Complex64>> {
        let (n, nc) = (self.n, coarse.n);
        if nc > n || c.len() != coarse.spectrum_len() {
            return Err(Error::Solver(format!("cannot prolong a {nc} spectrum to {n}")));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.spectrum_len()];
        let shift = std::f64::consts::PI * (1.0 / n as f64 - 1.0 / nc as f64);
        for kx in 0..nc / 2 {
            for ky in 0..nc {
                let s = coarse.signed(ky);
                if s == -(nc as i64) / 2 {
                    continue;
                }
                let fy = s.rem_euclid(n as i64) as usize;
                out[kx * n + fy] = c[kx * nc + ky] * Complex64::from_polar(1.0, shift * (kx as i64 + s) as f64);
            }
        }
        Ok(out)
    }

    /// Whether the 2/3 rule keeps mode `idx`.
    #[inline]
    pub fn dealiased(&self, idx: usize) -> bool {
        let (kx, ky) = (idx / self.n, idx % self.n);
        let cut = self.n as i64 / 3;
        (kx as i64) <= cut && self.signed(ky).abs() <= cut
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_identity() {
        let n = 48;
        let data: Vec<f64> = (0..n * n).map(|i| ((i * 7919) % 113) as f64 / 113.0 - 0.5).collect();
        let f = Fft2::new(n).unwrap();
        let back = f.inverse(&f.forward(&data));
        let err = data.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn prolongation_matches_fine_sampling() {
        let f = |x: [f64; 2]| (2.0 * std::f64::consts::PI * (3.0 * x[0] - 2.0 * x[1]) + 0.3).sin() + 0.5 * (2.0 * std::f64::consts::PI * 5.0 * x[1]).cos();
        let sample = |n: usize| -> Vec<f64> {
            (0..n * n).map(|p| f([((p % n) as f64 + 0.5) / n as f64, ((p / n) as f64 + 0.5) / n as f64])).collect()
        };
        let (c, fine) = (Fft2::new(16).unwrap(), Fft2::new(40).unwrap());
        let up = fine.prolong(&c, &c.forward(&sample(16))).unwrap();
        let back = fine.inverse(&up);
        let err = back.iter().zip(sample(40)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn single_mode_lands_in_its_bin() {
        let n = 32;
        let f = Fft2::new(n).unwrap();
        let tp = 2.0 * std::f64::consts::PI;
        let data: Vec<f64> = (0..n * n)
            .map(|i| {
                let (x, y) = ((i % n) as f64 / n as f64, (i / n) as f64 / n as f64);
                (tp * (3.0 * x - 2.0 * y)).cos()
            })
            .collect();
        let s = f.forward(&data);
        let idx = 3 * n + (n - 2);
        assert!((s[idx].re - 0.5).abs() < 1e-13 && s[idx].im.abs() < 1e-13);
        assert_eq!(f.wavevector(idx), [3.0 * tp, -2.0 * tp]);
        let rest: f64 = s.iter().enumerate().filter(|&(i, _)| i != idx).map(|(_, c)| c.norm()).sum();
        assert!(rest < 1e-12);
    }
}
