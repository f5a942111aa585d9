//! The `x_3`-independent lift `u = (v_1, v_2, theta)` of the planar system to the
//! three-torus, with forcing `f = (g_1, g_2, 0)` and zero pressure.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::GridField;
use crate::numerics::quad::gauss_legendre;
use crate::smoothing::{spatial_terms, SmoothedFamily, TimeSchedule};
use crate::spectral::{truncate, AdvectionDiffusion, Fft2, SolverSettings, SpectralField};

/// `u` and `f` stored once on the planar grid; every `x_3` slice is the same.
#[derive(Debug, Clone)]
pub struct Lifted3DField {
    pub t: f64,
    /// Components `v_1, v_2, theta`.
    pub u: GridField,
    /// Components `g_1, g_2`; the third is zero by construction.
    pub forcing: GridField,
}

pub fn lift(v: &GridField, theta: &GridField, g: &GridField, t: f64) -> Result<Lifted3DField> {
    let n = v.res();
    if v.comps() != 2 || g.comps() != 2 || theta.comps() != 1 {
        return Err(Error::Fields("lift needs a planar velocity, a scalar and a planar forcing".into()));
    }
    if theta.res() != n || g.res() != n {
        return Err(Error::Fields(format!("lift grids differ: {n}, {}, {}", theta.res(), g.res())));
    }
    let mut data = v.data().to_vec();
    data.extend_from_slice(theta.comp(0));
    Ok(Lifted3DField { t, u: GridField::from_data(n, 3, data)?, forcing: g.clone() })
}

impl Lifted3DField {
    pub fn res(&self) -> usize {
        self.u.res()
    }

    /// Component `c` of `f`.
    pub fn forcing_comp(&self, c: usize) -> Vec<f64> {
        match c {
            0 | 1 => self.forcing.comp(c).to_vec(),
            _ => vec![0.0; self.res() * self.res()],
        }
    }

    /// `||grad u||^2` on `T^3`, from a 3D transform of `nz` replicated slices.
    pub fn grad_l2_sq_3d(&self, nz: usize) -> f64 {
        (0..3).map(|c| torus3_grad_sq(self.u.comp(c), self.res(), nz)).sum()
    }

    /// `(||grad v||^2, ||grad theta||^2)` on `T^2`.
    pub fn planar_grad_sq(&self, fft: &Fft2) -> Result<(f64, f64)> {
        let g = |c| SpectralField::from_grid(fft, &self.u, c).map(|s| s.grad_l2_sq(fft));
        Ok((g(0)? + g(1)?, g(2)?))
    }

    /// `sup |div u|`; the `x_3` derivative of `theta` vanishes, so this is `div v`.
    pub fn divergence(&self, fft: &Fft2) -> f64 {
        planar_divergence(fft, self.u.comp(0), self.u.comp(1))
    }

    /// `sup |div f|`, a diagnostic: the forcing need not be solenoidal.
    pub fn forcing_divergence(&self, fft: &Fft2) -> f64 {
        planar_divergence(fft, self.forcing.comp(0), self.forcing.comp(1))
    }
}

fn planar_divergence(fft: &Fft2, a: &[f64], b: &[f64]) -> f64 {
    let (sa, sb) = (fft.forward(a), fft.forward(b));
    let d: Vec<Complex64> = (0..sa.len())
        .map(|i| {
            let k = fft.wavevector(i);
            Complex64::new(0.0, 1.0) * (sa[i] * k[0] + sb[i] * k[1])
        })
        .collect();
    fft.inverse(&d).iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `sum |k|^2 |c_k|^2` of the `n x n x nz` array whose every `x_3` slice is `plane`.
fn torus3_grad_sq(plane: &[f64], n: usize, nz: usize) -> f64 {
    let mut planner = FftPlanner::<f64>::new();
    let (fx, fz) = (planner.plan_fft_forward(n), planner.plan_fft_forward(nz));
    // Index (z, y, x), x fastest.
    let mut a: Vec<Complex64> = (0..nz).flat_map(|_| plane.iter().map(|&p| Complex64::new(p, 0.0))).collect();
    for row in a.chunks_mut(n) {
        fx.process(row);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for z in 0..nz {
        for x in 0..n {
            for y in 0..n {
                col[y] = a[(z * n + y) * n + x];
            }
            fx.process(&mut col);
            for y in 0..n {
                a[(z * n + y) * n + x] = col[y];
            }
        }
    }
    let mut pill = vec![Complex64::new(0.0, 0.0); nz];
    for p in 0..n * n {
        for z in 0..nz {
            pill[z] = a[z * n * n + p];
        }
        fz.process(&mut pill);
        for z in 0..nz {
            a[z * n * n + p] = pill[z];
        }
    }
    let signed = |k: usize, m: usize| if k <= m / 2 { k as f64 } else { k as f64 - m as f64 };
    let tp = 2.0 * std::f64::consts::PI;
    let norm = 1.0 / (n * n * nz) as f64;
    let mut acc = 0.0;
    for z in 0..nz {
        for y in 0..n {
            for x in 0..n {
                let k2 = tp * tp * (signed(x, n).powi(2) + signed(y, n).powi(2) + signed(z, nz).powi(2));
                acc += k2 * (a[(z * n + y) * n + x] * norm).norm_sqr();
            }
        }
    }
    acc
}

/// Fields at the five times `t + j h`, `j = -2..=2`, for the residual.
#[derive(Debug, Clone)]
pub struct TimeStencil {
    pub t: f64,
    pub h: f64,
    pub v: [[Vec<f64>; 2]; 5],
    pub theta: [Vec<f64>; 5],
    /// `g` at the centre.
    pub g: [Vec<f64>; 2],
}

/// Sup norms of the residual of the lifted momentum equation at one time, with its budget.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ResidualSample {
    pub t: f64,
    /// `d_t v + v . grad v - mu Lap v - g`.
    pub horizontal: f64,
    /// `d_t theta + v . grad theta - mu Lap theta`.
    pub vertical: f64,
    /// Richardson estimate of the centred-difference error.
    pub time_error: f64,
    /// Part of `v . grad theta` outside the band the solver keeps.
    pub truncation: f64,
    /// Size of the largest term, for the rounding floor.
    pub scale: f64,
    /// `10 (time_error + truncation) + 1e-10 scale`.
    pub budget: f64,
}

impl ResidualSample {
    pub fn holds(&self) -> bool {
        self.horizontal.max(self.vertical) <= self.budget
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn centred(a: &[f64], b: &[f64], h: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(p, q)| (p - q) / (2.0 * h)).collect()
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (p, q)| m.max((p - q).abs()))
}

/// Residual of `d_t u + u . grad u + grad p - mu Lap u - f` with `p = 0`, evaluated from a stencil.
pub fn ns_residual(fft: &Fft2, mu: f64, s: &TimeStencil) -> Result<ResidualSample> {
    let n2 = fft.n() * fft.n();
    if s.v.iter().flatten().chain(&s.theta).chain(&s.g).any(|f| f.len() != n2) || !(s.h > 0.0) {
        return Err(Error::Fields("residual stencil does not match the grid".into()));
    }
    let (adv, lap) = spatial_terms(fft, &s.v[2]);
    let mut horizontal = 0.0f64;
    let mut time_error = 0.0f64;
    let mut scale = 0.0f64;
    for c in 0..2 {
        let d1 = centred(&s.v[3][c], &s.v[1][c], s.h);
        let d2 = centred(&s.v[4][c], &s.v[0][c], 2.0 * s.h);
        time_error = time_error.max(sup_diff(&d1, &d2) / 3.0);
        let r: Vec<f64> = (0..n2).map(|p| d1[p] + adv[c][p] - mu * lap[c][p] - s.g[c][p]).collect();
        horizontal = horizontal.max(sup(&r));
        scale = scale.max(sup(&d1)).max(sup(&adv[c])).max(mu * sup(&lap[c])).max(sup(&s.g[c]));
    }
    let spec = fft.forward(&s.theta[2]);
    let deriv = |m: &dyn Fn([f64; 2]) -> Complex64| -> Vec<f64> {
        let d: Vec<Complex64> = spec.iter().enumerate().map(|(i, z)| z * m(fft.wavevector(i))).collect();
        fft.inverse(&d)
    };
    let gx = deriv(&|k| Complex64::new(0.0, k[0]));
    let gy = deriv(&|k| Complex64::new(0.0, k[1]));
    let lap_t = deriv(&|k| Complex64::new(-(k[0] * k[0] + k[1] * k[1]), 0.0));
    let prod: Vec<f64> = (0..n2).map(|p| s.v[2][0][p] * gx[p] + s.v[2][1][p] * gy[p]).collect();
    let mut kept = fft.forward(&prod);
    truncate(fft, &mut kept);
    let truncation = sup_diff(&prod, &fft.inverse(&kept));
    let d1 = centred(&s.theta[3], &s.theta[1], s.h);
    let d2 = centred(&s.theta[4], &s.theta[0], 2.0 * s.h);
    time_error = time_error.max(sup_diff(&d1, &d2) / 3.0);
    let r: Vec<f64> = (0..n2).map(|p| d1[p] + prod[p] - mu * lap_t[p]).collect();
    scale = scale.max(sup(&d1)).max(sup(&prod)).max(mu * sup(&lap_t));
    Ok(ResidualSample {
        t: s.t,
        horizontal,
        vertical: sup(&r),
        time_error,
        truncation,
        scale,
        budget: 10.0 * (time_error + truncation) + 1e-10 * scale,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct EmbedSettings {
    /// Number of random residual times.
    pub times: usize,
    pub seed: u64,
    /// Stencil spacing as a fraction of the current interval `Delta t_n`.
    pub step: f64,
    /// Slices of the explicit 3D grid in the gradient identity check.
    pub slices: usize,
    pub cfl: f64,
    pub max_dt: f64,
    /// Gauss points per interval for `int ||grad v||^2`.
    pub quadrature: usize,
}

impl Default for EmbedSettings {
    fn default() -> Self {
        EmbedSettings { times: 20, seed: 7, step: 1e-3, slices: 4, cfl: 0.5, max_dt: 2e-3, quadrature: 8 }
    }
}

/// Gradient identity `||grad u||^2 = ||grad v||^2 + ||grad theta||^2` at one time.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IdentityCheck {
    pub t: f64,
    pub grad_u_sq: f64,
    pub grad_v_sq: f64,
    pub grad_theta_sq: f64,
    pub relative_defect: f64,
    pub divergence: f64,
    pub forcing_divergence: f64,
    /// `sup |f_3|`.
    pub forcing_vertical: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DissipationBudget {
    /// `mu int ||grad v||^2`.
    pub velocity: f64,
    /// `mu int ||grad theta||^2` by quadrature over the solver stages.
    pub theta: f64,
    /// `D_m` from the energy balance.
    pub measured: f64,
    /// `mu int ||grad u||^2 = velocity + theta`.
    pub total: f64,
}

impl DissipationBudget {
    /// `total >= theta >= D_m`, the last up to the quadrature error of the stages.
    pub fn holds(&self) -> bool {
        self.total >= self.theta && self.theta >= self.measured * (1.0 - 1e-6)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub m: u32,
    pub mu: f64,
    pub res: usize,
    pub samples: Vec<ResidualSample>,
    pub identities: Vec<IdentityCheck>,
    pub dissipation: DissipationBudget,
}

impl ResidualReport {
    pub fn residuals_hold(&self) -> bool {
        self.samples.iter().all(|s| s.holds())
    }

    pub fn identities_hold(&self, tol: f64) -> bool {
        self.identities.iter().all(|c| c.relative_defect <= tol && c.forcing_vertical == 0.0)
    }
}

/// `mu int_0^1 ||grad v^m||^2`, Gauss quadrature on each interval.
fn velocity_dissipation(fam: &SmoothedFamily, points: usize) -> f64 {
    let fft = fam.fft();
    let rule = gauss_legendre(points);
    let mut acc = 0.0;
    for n in 0..=fam.schedule().m {
        let (a, h) = (TimeSchedule::junction(n), TimeSchedule::interval(n));
        for (x, w) in rule.0.iter().zip(&rule.1) {
            let v = fam.velocity_at(a + 0.5 * h * (1.0 + x));
            let g: f64 = v.iter().map(|c| SpectralField::from_coeffs(fft, fft.forward(c)).grad_l2_sq(fft)).sum();
            acc += 0.5 * h * w * g;
        }
    }
    fam.mu() * acc
}

/// Lift the solved system at random times, check the identities and the residual budget.
pub fn embed_experiment(fam: &SmoothedFamily, settings: &EmbedSettings) -> Result<ResidualReport> {
    if settings.times == 0 || !(settings.step > 0.0 && settings.step < 0.05) {
        return Err(Error::Config("embed needs at least one time and a step in (0, 0.05)".into()));
    }
    let schedule = fam.schedule();
    let (m, mu) = (schedule.m, schedule.viscosity());
    let solver = AdvectionDiffusion::new(fam.res(), mu)?;
    let fft = solver.fft().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let end = schedule.end();
    let mut centres: Vec<(f64, f64)> = (0..settings.times)
        .map(|_| {
            let t = rng.gen_range(0.05..end * 0.999);
            (t, settings.step * TimeSchedule::interval(TimeSchedule::locate(t).0))
        })
        .collect();
    centres.sort_by(|a, b| a.0.total_cmp(&b.0));
    let stops: Vec<f64> = centres.iter().flat_map(|&(t, h)| (-2..=2).map(move |j| t + j as f64 * h)).collect();
    let mut states: Vec<Vec<f64>> = Vec::with_capacity(stops.len());
    let theta0 = crate::dissipation::mean_free(fam.density_spectrum(0.0)?).to_grid(&fft);
    let last = stops.iter().copied().fold(0.0, f64::max);
    let mut sorted = stops.clone();
    sorted.sort_by(f64::total_cmp);
    let run = solver.run(
        fam,
        &theta0,
        (0.0, 1.0),
        SolverSettings { dt: settings.max_dt, cfl: settings.cfl, extinction: 0.0, adaptive: true },
        &sorted,
        |_, theta| {
            states.push(theta.to_grid(&fft).into_data());
            Ok(())
        },
    )?;
    if states.len() != sorted.len() || last > 1.0 {
        return Err(Error::Solver(format!("expected {} stencil states, got {}", sorted.len(), states.len())));
    }
    let state_at = |t: f64| -> &Vec<f64> {
        let i = sorted.partition_point(|&s| s < t - 1e-13);
        &states[i]
    };
    let mut samples = Vec::new();
    let mut identities = Vec::new();
    for &(t, h) in &centres {
        let times: Vec<f64> = (-2..=2).map(|j| t + j as f64 * h).collect();
        let v: Vec<[Vec<f64>; 2]> = times.iter().map(|&s| fam.velocity_at(s)).collect();
        let g = fam.forcing_at(t);
        let stencil = TimeStencil {
            t,
            h,
            v: v.clone().try_into().expect("five velocities"),
            theta: std::array::from_fn(|j| state_at(times[j]).clone()),
            g: [g.comp(0).to_vec(), g.comp(1).to_vec()],
        };
        samples.push(ns_residual(&fft, mu, &stencil)?);
        let vg = GridField::from_data(fft.n(), 2, [v[2][0].clone(), v[2][1].clone()].concat())?;
        let theta = GridField::from_data(fft.n(), 1, stencil.theta[2].clone())?;
        let lifted = lift(&vg, &theta, &g, t)?;
        identities.push(identity_check(&lifted, &fft, settings.slices)?);
    }
    let d = run.records.last().expect("at least the initial record");
    let velocity = velocity_dissipation(fam, settings.quadrature);
    let dissipation = DissipationBudget {
        velocity,
        theta: d.dissipated_quadrature,
        measured: d.dissipated,
        total: velocity + d.dissipated_quadrature,
    };
    Ok(ResidualReport { m, mu, res: fam.res(), samples, identities, dissipation })
}

pub fn identity_check(lifted: &Lifted3DField, fft: &Fft2, slices: usize) -> Result<IdentityCheck> {
    let grad_u_sq = lifted.grad_l2_sq_3d(slices);
    let (grad_v_sq, grad_theta_sq) = lifted.planar_grad_sq(fft)?;
    let planar = grad_v_sq + grad_theta_sq;
    Ok(IdentityCheck {
        t: lifted.t,
        grad_u_sq,
        grad_v_sq,
        grad_theta_sq,
        relative_defect: (grad_u_sq - planar).abs() / planar.max(f64::MIN_POSITIVE),
        divergence: lifted.divergence(fft),
        forcing_divergence: lifted.forcing_divergence(fft),
        forcing_vertical: sup(&lifted.forcing_comp(2)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn shear(n: usize) -> GridField {
        GridField::vector_from_fn(n, |x| [(2.0 * PI * x[1]).sin(), 0.0])
    }

    #[test]
    fn zero_velocity_lift() {
        let n = 16;
        let v = GridField::zeros(n, 2);
        let th = GridField::from_fn(n, |x| (2.0 * PI * x[0]).sin());
        let u = lift(&v, &th, &GridField::zeros(n, 2), 0.0).unwrap();
        let fft = Fft2::new(n).unwrap();
        assert_eq!(u.u.comp(0), &vec![0.0; n * n][..]);
        assert_eq!(u.u.comp(2), th.comp(0));
        assert!(u.divergence(&fft) < 1e-12);
        assert!(u.forcing_comp(2).iter().all(|&f| f == 0.0));
    }

    #[test]
    fn gradient_identity_two_ways() {
        let n = 32;
        let v = GridField::vector_from_fn(n, |x| {
            let (a, b) = (2.0 * PI * x[0], 2.0 * PI * 2.0 * x[1]);
            [a.sin() * b.cos(), -2.0 * a.cos() * b.sin() / 2.0]
        });
        let th = GridField::from_fn(n, |x| (2.0 * PI * (3.0 * x[0] - x[1])).cos());
        let u = lift(&v, &th, &GridField::zeros(n, 2), 0.3).unwrap();
        let fft = Fft2::new(n).unwrap();
        let c = identity_check(&u, &fft, 4).unwrap();
        assert!(c.relative_defect < 1e-10, "{c:?}");
        // |grad theta|^2 = 10 (2 pi)^2 / 2.
        assert!((c.grad_theta_sq - 5.0 * 4.0 * PI * PI).abs() < 1e-9);
        assert_eq!(c.forcing_vertical, 0.0);
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let v = GridField::zeros(16, 2);
        assert!(lift(&v, &GridField::zeros(8, 1), &GridField::zeros(16, 2), 0.0).is_err());
        assert!(lift(&v, &GridField::zeros(16, 2), &GridField::zeros(16, 2), 0.0).is_err());
    }

    fn stencil(n: usize, mu: f64, t: f64, h: f64) -> TimeStencil {
        let v = shear(n);
        let decay = |s: f64| (-4.0 * PI * PI * mu * s).exp();
        let vel = |s: f64| [v.comp(0).iter().map(|p| p * decay(s)).collect(), vec![0.0; n * n]];
        let th = |s: f64| GridField::from_fn(n, |x| decay(s) * (2.0 * PI * x[1]).cos()).into_data();
        // A shear carries no self-advection; the forcing cancels the decay and diffusion exactly.
        let g = [vec![0.0; n * n], vec![0.0; n * n]];
        TimeStencil {
            t,
            h,
            v: std::array::from_fn(|j| vel(t + (j as f64 - 2.0) * h)),
            theta: std::array::from_fn(|j| th(t + (j as f64 - 2.0) * h)),
            g,
        }
    }

    #[test]
    fn static_shear_has_no_residual() {
        let fft = Fft2::new(32).unwrap();
        let r = ns_residual(&fft, 0.0, &stencil(32, 0.0, 0.4, 1e-3)).unwrap();
        assert!(r.horizontal < 1e-8 && r.vertical < 1e-8, "{r:?}");
        assert!(r.holds());
    }

    #[test]
    fn viscous_decay_within_budget() {
        let fft = Fft2::new(32).unwrap();
        let r = ns_residual(&fft, 0.05, &stencil(32, 0.05, 0.4, 1e-3)).unwrap();
        // The decaying shear solves the unforced heat equation, so only time differencing is left.
        assert!(r.vertical < 1e-5 && r.holds(), "{r:?}");
        assert!(r.time_error > 0.0);
    }
}
