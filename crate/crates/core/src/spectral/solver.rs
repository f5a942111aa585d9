//! Pseudo-spectral advection-diffusion `d_t theta + v . grad theta = mu Lap theta`.
//!
//! Diffusion is integrated exactly per mode (integrating factor) and advection by
//! the Lawson RK4 scheme, with the 2/3 rule applied to every product.

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::Serialize;

use super::fft::Fft2;
use super::field::SpectralField;
use crate::error::{Error, Result};
use crate::grid::GridField;

/// A time-dependent velocity sampled on the solver grid.
pub trait VelocityField: Sync {
    /// Fill `out` with `(v_x, v_y)` at time `t`, row-major on the `n x n` grid.
    fn velocity(&self, t: f64, out: &mut [Vec<f64>; 2]) -> Result<()>;
    /// Upper bound for `sup_t |v|`, used by the step-size check.
    fn sup_bound(&self) -> f64;
    /// Upper bound for `|v|` over `[t0, t1]`; adaptive steps use it.
    fn local_bound(&self, _t0: f64, _t1: f64) -> f64 {
        self.sup_bound()
    }
    /// Time from which `v` vanishes identically, if any.
    fn vanishes_after(&self) -> Option<f64> {
        None
    }
}

/// A velocity that does not depend on time.
pub struct SteadyVelocity {
    pub v: [Vec<f64>; 2],
}

impl SteadyVelocity {
    pub fn from_grid(g: &GridField) -> Self {
        SteadyVelocity { v: [g.comp(0).to_vec(), g.comp(1).to_vec()] }
    }
}

impl VelocityField for SteadyVelocity {
    fn velocity(&self, _t: f64, out: &mut [Vec<f64>; 2]) -> Result<()> {
        out[0].copy_from_slice(&self.v[0]);
        out[1].copy_from_slice(&self.v[1]);
        Ok(())
    }

    fn sup_bound(&self) -> f64 {
        self.v[0].iter().zip(&self.v[1]).map(|(a, b)| a.hypot(*b)).fold(0.0, f64::max)
    }
}

/// Leray projection of a velocity spectrum, in place.
pub fn leray_project(fft: &Fft2, a: &mut [Complex64], b: &mut [Complex64]) {
    a.par_iter_mut().zip(b.par_iter_mut()).enumerate().for_each(|(i, (p, q))| {
        let k = fft.wavevector(i);
        let k2 = k[0] * k[0] + k[1] * k[1];
        if k2 > 0.0 {
            let d = (*p * k[0] + *q * k[1]) / k2;
            *p -= d * k[0];
            *q -= d * k[1];
        }
    });
}

/// Leray projection and 2/3 truncation of a sampled velocity, in place.
pub fn project_velocity(fft: &Fft2, v: &mut [Vec<f64>; 2]) {
    let mut a = fft.forward(&v[0]);
    let mut b = fft.forward(&v[1]);
    leray_project(fft, &mut a, &mut b);
    truncate(fft, &mut a);
    truncate(fft, &mut b);
    fft.inverse_into(&a, &mut v[0]);
    fft.inverse_into(&b, &mut v[1]);
}

/// Zero the modes the 2/3 rule removes.
pub fn truncate(fft: &Fft2, c: &mut [Complex64]) {
    c.par_iter_mut().enumerate().for_each(|(i, z)| {
        if !fft.dealiased(i) {
            *z = Complex64::new(0.0, 0.0);
        }
    });
}

/// Spectral divergence `sup |div v|` of a sampled velocity.
pub fn spectral_divergence(fft: &Fft2, v: &[Vec<f64>; 2]) -> f64 {
    let a = fft.forward(&v[0]);
    let b = fft.forward(&v[1]);
    let d: Vec<Complex64> = a
        .iter()
        .zip(&b)
        .enumerate()
        .map(|(i, (p, q))| {
            let k = fft.wavevector(i);
            Complex64::new(0.0, 1.0) * (p * k[0] + q * k[1])
        })
        .collect();
    fft.inverse(&d).iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SolverSettings {
    /// Largest allowed step.
    pub dt: f64,
    /// Courant number bound: `dt <= cfl * dx / sup |v|`.
    pub cfl: f64,
    /// Relative energy below which the advection term is dropped and the rest
    /// of the run is pure diffusion.
    pub extinction: f64,
    /// Shrink each step below `dt` to the Courant bound of the velocity over
    /// that step, instead of checking `dt` once against the global bound.
    pub adaptive: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings { dt: 1e-3, cfl: 0.5, extinction: 0.0, adaptive: false }
    }
}

/// One output sample of a run.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StepRecord {
    pub t: f64,
    pub l2_sq: f64,
    pub grad_sq: f64,
    /// `mu int_0^t ||grad theta||^2` from the energy balance.
    pub dissipated: f64,
    /// The same integral by RK4 quadrature over the stage states.
    pub dissipated_quadrature: f64,
    /// Fraction of the energy in the outer sixth of the retained spectrum.
    pub tail_fraction: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<StepRecord>,
    pub final_state: SpectralField,
    pub steps: usize,
    /// Time at which the energy fell below the extinction threshold.
    pub extinct_at: Option<f64>,
}

pub struct AdvectionDiffusion {
    fft: Fft2,
    mu: f64,
    k2: Vec<f64>,
    mask: Vec<bool>,
    tail: Vec<bool>,
}

impl AdvectionDiffusion {
    pub fn new(n: usize, mu: f64) -> Result<Self> {
        if !(mu >= 0.0) || !mu.is_finite() {
            return Err(Error::Solver(format!("viscosity must be finite and nonnegative, got {mu}")));
        }
        let fft = Fft2::new(n)?;
        let len = fft.spectrum_len();
        let k2 = (0..len).map(|i| {
            let k = fft.wavevector(i);
            k[0] * k[0] + k[1] * k[1]
        });
        let mask: Vec<bool> = (0..len).map(|i| fft.dealiased(i)).collect();
        let cut = (n / 3) as f64 * 2.0 * std::f64::consts::PI;
        let tail = (0..len)
            .map(|i| {
                let k = fft.wavevector(i);
                mask[i] && k[0].abs().max(k[1].abs()) > cut * 5.0 / 6.0
            })
            .collect();
        Ok(AdvectionDiffusion { k2: k2.collect(), mask, tail, fft, mu })
    }

    pub fn fft(&self) -> &Fft2 {
        &self.fft
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Largest step the Courant bound allows for `v`.
    pub fn max_step(&self, v: &dyn VelocityField, cfl: f64) -> f64 {
        let dx = 1.0 / self.fft.n() as f64;
        let s = v.sup_bound();
        if s > 0.0 {
            cfl * dx / s
        } else {
            f64::INFINITY
        }
    }

    fn energy(&self, c: &[Complex64]) -> (f64, f64, f64) {
        let (mut e, mut g, mut tail) = (0.0, 0.0, 0.0);
        for (i, z) in c.iter().enumerate() {
            let w = self.fft.weight(i) * z.norm_sqr();
            e += w;
            g += w * self.k2[i];
            if self.tail[i] {
                tail += w;
            }
        }
        (e, g, tail)
    }

    /// `-P(v . grad theta)` in spectral space.
    fn advection(&self, c: &[Complex64], v: &[Vec<f64>; 2], work: &mut Work) -> Vec<Complex64> {
        let fft = &self.fft;
        for (d, comp) in [0usize, 1].into_iter().zip([&mut work.sx, &mut work.sy]) {
            comp.par_iter_mut().zip(c.par_iter()).enumerate().for_each(|(i, (o, z))| {
                *o = if self.mask[i] { Complex64::new(0.0, fft.wavevector(i)[d]) * z } else { Complex64::new(0.0, 0.0) };
            });
        }
        fft.inverse_into(&work.sx, &mut work.gx);
        fft.inverse_into(&work.sy, &mut work.gy);
        work.gx.par_iter_mut().zip(work.gy.par_iter()).zip(v[0].par_iter().zip(v[1].par_iter())).for_each(|((a, b), (p, q))| {
            *a = -(p * *a + q * b);
        });
        let mut out = fft.forward(&work.gx);
        out.par_iter_mut().enumerate().for_each(|(i, z)| {
            if !self.mask[i] {
                *z = Complex64::new(0.0, 0.0);
            }
        });
        out
    }

    /// Integrate from `theta0` over `[t0, t1]` with steps no longer than
    /// `settings.dt`, landing exactly on every checkpoint, which is handed to
    /// `observe` together with the running record.
    pub fn run(
        &self,
        v: &dyn VelocityField,
        theta0: &GridField,
        span: (f64, f64),
        settings: SolverSettings,
        checkpoints: &[f64],
        mut observe: impl FnMut(&StepRecord, &SpectralField) -> Result<()>,
    ) -> Result<RunOutput> {
        let n = self.fft.n();
        if theta0.res() != n {
            return Err(Error::Solver(format!("initial field has resolution {}, solver {}", theta0.res(), n)));
        }
        let limit = self.max_step(v, settings.cfl);
        if !(settings.cfl > 0.0 && settings.cfl <= 1.0) {
            return Err(Error::Solver(format!("Courant number {} outside (0, 1]", settings.cfl)));
        }
        if !settings.adaptive && settings.dt > limit * (1.0 + 1e-12) {
            return Err(Error::Solver(format!("step {:.3e} violates the Courant bound {:.3e}", settings.dt, limit)));
        }
        let (t0, t1) = span;
        let mut c = self.fft.forward(theta0.comp(0));
        c.iter_mut().enumerate().for_each(|(i, z)| {
            if !self.mask[i] {
                *z = Complex64::new(0.0, 0.0);
            }
        });
        let mut work = Work::new(n);
        let (e0, g0, tail0) = self.energy(&c);
        let mut rec = StepRecord {
            t: t0,
            l2_sq: e0,
            grad_sq: g0,
            dissipated: 0.0,
            dissipated_quadrature: 0.0,
            tail_fraction: if e0 > 0.0 { tail0 / e0 } else { 0.0 },
        };
        let mut records = vec![rec];
        let mut stops: Vec<f64> = checkpoints.iter().copied().chain(v.vanishes_after()).filter(|&s| s > t0 && s < t1).collect();
        stops.push(t1);
        stops.sort_by(f64::total_cmp);
        stops.dedup();
        let mut pending: Vec<f64> = checkpoints.iter().copied().filter(|&s| s >= t0 && s <= t1).collect();
        pending.sort_by(f64::total_cmp);
        let mut next_obs = 0;
        let mut emit = |rec: &StepRecord, c: &[Complex64], next_obs: &mut usize| -> Result<()> {
            while *next_obs < pending.len() && (pending[*next_obs] - rec.t).abs() <= 1e-12 * (1.0 + rec.t.abs()) {
                observe(rec, &SpectralField::from_coeffs(&self.fft, c.to_vec()))?;
                *next_obs += 1;
            }
            Ok(())
        };
        emit(&rec, &c, &mut next_obs)?;
        let mut t = t0;
        let mut steps = 0;
        let mut extinct_at = None;
        for &stop in &stops {
            while stop - t > 1e-14 * (1.0 + stop.abs()) {
                let quiet = v.vanishes_after().is_some_and(|s| t >= s - 1e-14);
                let h = if extinct_at.is_some() || quiet {
                    stop - t
                } else if settings.adaptive {
                    let dx = 1.0 / n as f64;
                    let mut h = (stop - t).min(settings.dt);
                    loop {
                        let lim = settings.cfl * dx / v.local_bound(t, t + h);
                        if h <= lim {
                            break;
                        }
                        h = lim;
                    }
                    h
                } else {
                    let left = stop - t;
                    let k = (left / settings.dt).ceil().max(1.0);
                    left / k
                };
                let before = rec.l2_sq;
                let quad = if extinct_at.is_some() || quiet {
                    self.diffuse(&mut c, h)
                } else {
                    self.rk4_step(&mut c, v, t, h, &mut work)?
                };
                t = if h == stop - t { stop } else { t + h };
                steps += 1;
                let (e, g, tail) = self.energy(&c);
                if !e.is_finite() || !g.is_finite() {
                    return Err(Error::Solver(format!("non-finite state at t = {t:.6}")));
                }
                rec = StepRecord {
                    t,
                    l2_sq: e,
                    grad_sq: g,
                    dissipated: rec.dissipated + 0.5 * (before - e),
                    dissipated_quadrature: rec.dissipated_quadrature + quad,
                    tail_fraction: if e > 0.0 { tail / e } else { 0.0 },
                };
                records.push(rec);
                emit(&rec, &c, &mut next_obs)?;
                if extinct_at.is_none() && settings.extinction > 0.0 && e <= settings.extinction * e0 {
                    extinct_at = Some(t);
                }
            }
        }
        Ok(RunOutput { records, final_state: SpectralField::from_coeffs(&self.fft, c), steps, extinct_at })
    }

    /// Exact diffusion over `h`; returns the dissipation integral of the step.
    fn diffuse(&self, c: &mut [Complex64], h: f64) -> f64 {
        let mut acc = 0.0;
        for (i, z) in c.iter_mut().enumerate() {
            let lam = 2.0 * self.mu * self.k2[i];
            let e = self.fft.weight(i) * z.norm_sqr();
            // mu k^2 int_0^h e^{-lam s} ds |z|^2 = (1 - e^{-lam h}) |z|^2 / 2
            acc += 0.5 * e * -(-lam * h).exp_m1();
            *z *= (-self.mu * self.k2[i] * h).exp();
        }
        acc
    }

    fn rk4_step(&self, c: &mut Vec<Complex64>, v: &dyn VelocityField, t: f64, h: f64, work: &mut Work) -> Result<f64> {
        let e_half: Vec<f64> = self.k2.iter().map(|k| (-self.mu * k * 0.5 * h).exp()).collect();
        let diss = |z: &[Complex64]| self.mu * z.iter().enumerate().map(|(i, w)| self.fft.weight(i) * self.k2[i] * w.norm_sqr()).sum::<f64>();
        let mut vel = std::mem::take(&mut work.vel);
        v.velocity(t, &mut vel)?;
        let k1 = self.advection(c, &vel, work);
        let u1: Vec<Complex64> = c.iter().zip(&k1).zip(&e_half).map(|((z, k), e)| (z + k * (0.5 * h)) * e).collect();
        v.velocity(t + 0.5 * h, &mut vel)?;
        let k2 = self.advection(&u1, &vel, work);
        let u2: Vec<Complex64> = c.iter().zip(&k2).zip(&e_half).map(|((z, k), e)| z * e + k * (0.5 * h)).collect();
        let k3 = self.advection(&u2, &vel, work);
        let u3: Vec<Complex64> = c.iter().zip(&k3).zip(&e_half).map(|((z, k), e)| (z * e + k * h) * e).collect();
        v.velocity(t + h, &mut vel)?;
        let k4 = self.advection(&u3, &vel, work);
        let q = h / 6.0 * (diss(c) + 2.0 * diss(&u1) + 2.0 * diss(&u2) + diss(&u3));
        for i in 0..c.len() {
            let e = e_half[i];
            c[i] = (c[i] * e + k1[i] * (h / 6.0 * e)) * e + (k2[i] + k3[i]) * (h / 3.0 * e) + k4[i] * (h / 6.0);
        }
        work.vel = vel;
        Ok(q)
    }
}

struct Work {
    sx: Vec<Complex64>,
    sy: Vec<Complex64>,
    gx: Vec<f64>,
    gy: Vec<f64>,
    vel: [Vec<f64>; 2],
}

impl Work {
    fn new(n: usize) -> Self {
        let len = (n / 2 + 1) * n;
        Work {
            sx: vec![Complex64::new(0.0, 0.0); len],
            sy: vec![Complex64::new(0.0, 0.0); len],
            gx: vec![0.0; n * n],
            gy: vec![0.0; n * n],
            vel: [vec![0.0; n * n], vec![0.0; n * n]],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn shear(n: usize) -> SteadyVelocity {
        let g = GridField::vector_from_fn(n, |x| [(2.0 * PI * x[1]).sin(), 0.0]);
        SteadyVelocity::from_grid(&g)
    }

    #[test]
    fn single_mode_decays_exactly() {
        let (n, mu) = (32, 0.01);
        let s = AdvectionDiffusion::new(n, mu).unwrap();
        let th = GridField::from_fn(n, |x| (2.0 * PI * x[0]).sin());
        let zero = SteadyVelocity { v: [vec![0.0; n * n], vec![0.0; n * n]] };
        let out = s.run(&zero, &th, (0.0, 1.0), SolverSettings { dt: 0.1, ..Default::default() }, &[], |_, _| Ok(())).unwrap();
        let got = out.final_state.to_grid(s.fft());
        let decay = (-4.0 * PI * PI * mu).exp();
        let err = got.l2_distance(&th.scaled(decay)) / (decay * th.l2_sq().sqrt());
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn shear_conserves_energy_without_viscosity() {
        let n = 64;
        let s = AdvectionDiffusion::new(n, 0.0).unwrap();
        let th = GridField::from_fn(n, |x| (2.0 * PI * x[0]).cos() * (2.0 * PI * x[1]).cos());
        let v = shear(n);
        let dt = s.max_step(&v, 0.5);
        let out = s.run(&v, &th, (0.0, 1.0), SolverSettings { dt, ..Default::default() }, &[], |_, _| Ok(())).unwrap();
        let (e0, e1) = (out.records[0].l2_sq, out.records.last().unwrap().l2_sq);
        assert!(((e1 - e0) / e0).abs() < 1e-8, "{e0} {e1}");
        assert!(out.final_state.mean().abs() < 1e-14);
    }

    #[test]
    fn energy_identity_closes() {
        let n = 64;
        let s = AdvectionDiffusion::new(n, 2e-3).unwrap();
        let th = GridField::from_fn(n, |x| (2.0 * PI * x[0]).cos() * (2.0 * PI * x[1]).cos());
        let v = shear(n);
        let dt = s.max_step(&v, 0.5);
        let out = s.run(&v, &th, (0.0, 1.0), SolverSettings { dt, ..Default::default() }, &[], |_, _| Ok(())).unwrap();
        let last = out.records.last().unwrap();
        let lhs = last.l2_sq + 2.0 * last.dissipated_quadrature;
        let e0 = out.records[0].l2_sq;
        assert!(((lhs - e0) / e0).abs() < 1e-6, "{lhs} {e0}");
    }

    #[test]
    fn oversized_step_is_rejected() {
        let n = 32;
        let s = AdvectionDiffusion::new(n, 0.0).unwrap();
        let th = GridField::from_fn(n, |x| (2.0 * PI * x[0]).sin());
        let v = shear(n);
        let r = s.run(&v, &th, (0.0, 1.0), SolverSettings { dt: 0.1, ..Default::default() }, &[], |_, _| Ok(()));
        assert!(matches!(r, Err(Error::Solver(_))));
    }

    #[test]
    fn projection_removes_divergence() {
        let n = 32;
        let fft = Fft2::new(n).unwrap();
        let g = GridField::vector_from_fn(n, |x| [(2.0 * PI * x[0]).sin(), (2.0 * PI * x[1]).cos()]);
        let mut v = [g.comp(0).to_vec(), g.comp(1).to_vec()];
        assert!(spectral_divergence(&fft, &v) > 1.0);
        project_velocity(&fft, &mut v);
        assert!(spectral_divergence(&fft, &v) < 1e-10);
    }
}
