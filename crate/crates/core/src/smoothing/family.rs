use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use super::cache::BlockCache;
use super::schedule::TimeSchedule;
use crate::error::{Error, Result};
use crate::grid::GridField;
use crate::numerics::bump::{smooth_step, smooth_step_prime};
use crate::qss::{BlockTable, TiledField};
use crate::spectral::{leray_project, spectral_divergence, truncate, Fft2, SpectralField, VelocityField};

/// Relative step of the centred time difference in the forcing.
pub const FORCING_STEP: f64 = 1e-5;

/// Headroom on the node maxima for overshoot of the interpolant in `tau`.
const BOUND_MARGIN: f64 = 1.25;

struct Level {
    assign: Arc<Vec<u16>>,
    cache: BlockCache,
    /// Projected node velocities on the sampling grid, as spectra.
    vel: Vec<[Vec<Complex64>; 2]>,
    /// Largest speed of `v_n` over the nodes.
    sup: f64,
}

/// Where `t` falls: level, time factor `eta' / Delta t_n` and block time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phase {
    pub level: u32,
    pub factor: f64,
    pub tau: f64,
}

/// The smoothed fields `v^m, rho^m` on a solver grid.
///
/// On `[t_n, t_{n+1})`, `n <= m`, the velocity is `eta'(t) / Delta t_n v_n(x, tau)`
/// with `tau = (eta(t) - t_n) / Delta t_n`; it vanishes from `t_{m+1}` on, where the
/// density stays frozen at `rho_m(., 1)`.
///
/// Blocks come from a [`BlockCache`] at `k` cells, so every level is sampled on the
/// grid of resolution `2k`. Velocities are Leray-projected there once per node,
/// interpolated in `tau` as spectra, and zero-padded to the solver grid with the
/// 2/3 rule applied.
pub struct SmoothedFamily {
    schedule: TimeSchedule,
    coarse: Fft2,
    fft: Fft2,
    levels: Vec<Level>,
    memo: Mutex<Option<(f64, [Vec<f64>; 2])>>,
}

impl SmoothedFamily {
    pub fn new(cache: &BlockCache, table: &BlockTable, schedule: TimeSchedule, res: usize) -> Result<Self> {
        table.validate()?;
        if cache.blocks() != table.blocks {
            return Err(Error::Tiling(format!("cache holds {} blocks, table has {}", cache.blocks(), table.blocks)));
        }
        let sampled = 2 * cache.k();
        let finest = BlockTable::side(schedule.m);
        if sampled % finest != 0 {
            return Err(Error::Config(format!("sampling grid {sampled} is not a multiple of {finest} needed for m = {}", schedule.m)));
        }
        if res < sampled {
            return Err(Error::Config(format!("solver grid {res} is coarser than the sampling grid {sampled}")));
        }
        let coarse = Fft2::new(sampled)?;
        let fft = Fft2::new(res)?;
        let mut levels = Vec::new();
        for n in 0..=schedule.m {
            let c = if n == 0 { cache.clone() } else { cache.coarsen(5usize.pow(n))? };
            let assign = Arc::new(table.assignment(n));
            let mut vel = Vec::new();
            let mut sup = 0.0f64;
            for s in c.samples() {
                let g = TiledField::velocity(n, assign.clone(), s)?.materialise();
                let mut a = coarse.forward(g.comp(0));
                let mut b = coarse.forward(g.comp(1));
                leray_project(&coarse, &mut a, &mut b);
                let fine = [to_grid(&fft, &coarse, &a)?, to_grid(&fft, &coarse, &b)?];
                sup = sup.max(fine[0].iter().zip(&fine[1]).map(|(p, q)| p.hypot(*q)).fold(0.0, f64::max));
                vel.push([a, b]);
            }
            levels.push(Level { assign, cache: c, vel, sup });
        }
        Ok(SmoothedFamily { schedule, coarse, fft, levels, memo: Mutex::new(None) })
    }

    pub fn schedule(&self) -> TimeSchedule {
        self.schedule
    }

    pub fn mu(&self) -> f64 {
        self.schedule.viscosity()
    }

    /// Solver resolution.
    pub fn res(&self) -> usize {
        self.fft.n()
    }

    /// Resolution at which the blocks are sampled.
    pub fn sampled_res(&self) -> usize {
        self.coarse.n()
    }

    pub fn fft(&self) -> &Fft2 {
        &self.fft
    }

    /// `None` outside `[0, t_{m+1})`, where the velocity is off.
    pub fn phase(&self, t: f64) -> Option<Phase> {
        if !(0.0..self.schedule.end()).contains(&t) {
            return None;
        }
        let (n, x) = TimeSchedule::locate(t);
        Some(Phase { level: n, factor: smooth_step_prime(x) / TimeSchedule::interval(n), tau: smooth_step(x) })
    }

    /// Blocks of level `n`, for tile-wise norms.
    pub fn level_cache(&self, n: u32) -> &BlockCache {
        &self.levels[n as usize].cache
    }

    pub fn level_tiling(&self, n: u32) -> Arc<Vec<u16>> {
        self.levels[n as usize].assign.clone()
    }

    /// `rho_n(., tau)` on the sampling grid.
    pub fn level_density(&self, n: u32, tau: f64) -> GridField {
        let l = &self.levels[n as usize];
        TiledField::new(n, l.assign.clone(), l.cache.scalar(tau), 1.0).expect("consistent tiling").materialise()
    }

    /// Level and block time of `rho^m(., t)`, frozen after `t_{m+1}`.
    pub fn density_phase(&self, t: f64) -> (u32, f64) {
        match self.phase(t) {
            Some(p) => (p.level, p.tau),
            None if t < 0.0 => (0, 0.0),
            None => (self.schedule.m, 1.0),
        }
    }

    /// `rho^m(., t)` on the sampling grid.
    pub fn density_at(&self, t: f64) -> GridField {
        let (n, tau) = self.density_phase(t);
        self.level_density(n, tau)
    }

    /// `rho^m(., t)` on the solver grid, zero-padded from the sampling grid.
    pub fn density_spectrum(&self, t: f64) -> Result<SpectralField> {
        let g = self.density_at(t);
        let c = self.fft.prolong(&self.coarse, &self.coarse.forward(g.comp(0)))?;
        Ok(SpectralField::from_coeffs(&self.fft, c))
    }

    /// Spectrum of `v^m(., t)` on the solver grid, or `None` when it vanishes.
    fn velocity_spectrum(&self, t: f64) -> Option<[Vec<Complex64>; 2]> {
        let p = self.phase(t)?;
        let l = &self.levels[p.level as usize];
        let w = l.cache.coefficients(p.tau);
        let len = self.coarse.spectrum_len();
        let mut out = [vec![Complex64::new(0.0, 0.0); len], vec![Complex64::new(0.0, 0.0); len]];
        for (node, &wj) in l.vel.iter().zip(&w) {
            if wj == 0.0 {
                continue;
            }
            let f = wj * p.factor;
            for c in 0..2 {
                out[c].par_iter_mut().zip(node[c].par_iter()).for_each(|(o, z)| *o += z * f);
            }
        }
        let mut fine = [self.fft.prolong(&self.coarse, &out[0]).ok()?, self.fft.prolong(&self.coarse, &out[1]).ok()?];
        truncate(&self.fft, &mut fine[0]);
        truncate(&self.fft, &mut fine[1]);
        Some(fine)
    }

    /// `v^m(., t)` on the solver grid.
    pub fn velocity_at(&self, t: f64) -> [Vec<f64>; 2] {
        let n2 = self.res() * self.res();
        match self.velocity_spectrum(t) {
            Some([a, b]) => [self.fft.inverse(&a), self.fft.inverse(&b)],
            None => [vec![0.0; n2], vec![0.0; n2]],
        }
    }

    /// `sup |div v^m(., t)|`, computed spectrally.
    pub fn divergence_at(&self, t: f64) -> f64 {
        spectral_divergence(&self.fft, &self.velocity_at(t))
    }

    /// Half-width of the centred difference for `d_t v^m` at `t`.
    pub fn time_step(&self, t: f64) -> f64 {
        FORCING_STEP * TimeSchedule::interval(TimeSchedule::locate(t).0)
    }

    /// `d_t v^m` by a centred difference of half-width `h`.
    pub fn velocity_rate(&self, t: f64, h: f64) -> [Vec<f64>; 2] {
        let a = self.velocity_at(t + h);
        let b = self.velocity_at(t - h);
        let d = |x: &Vec<f64>, y: &Vec<f64>| x.iter().zip(y).map(|(p, q)| (p - q) / (2.0 * h)).collect::<Vec<f64>>();
        [d(&a[0], &b[0]), d(&a[1], &b[1])]
    }

    /// `g^m = d_t v + v . grad v - mu Lap v` at `t`.
    pub fn forcing_at(&self, t: f64) -> GridField {
        let v = self.velocity_at(t);
        let dt = self.velocity_rate(t, self.time_step(t));
        let (adv, lap) = spatial_terms(&self.fft, &v);
        let mu = self.mu();
        let n2 = self.res() * self.res();
        let mut data = vec![0.0; 2 * n2];
        for c in 0..2 {
            for p in 0..n2 {
                data[c * n2 + p] = dt[c][p] + adv[c][p] - mu * lap[c][p];
            }
        }
        GridField::from_data(self.res(), 2, data).expect("grid size")
    }

    /// Speed bound of level `n` for local coordinates in `[xa, xb]`.
    fn interval_bound(&self, n: u32, xa: f64, xb: f64) -> f64 {
        let peak = if xa <= 0.5 && xb >= 0.5 { smooth_step_prime(0.5) } else { smooth_step_prime(xa).max(smooth_step_prime(xb)) };
        BOUND_MARGIN * peak / TimeSchedule::interval(n) * self.levels[n as usize].sup
    }
}

fn to_grid(fft: &Fft2, coarse: &Fft2, c: &[Complex64]) -> Result<Vec<f64>> {
    let mut f = fft.prolong(coarse, c)?;
    truncate(fft, &mut f);
    Ok(fft.inverse(&f))
}

/// Spectral `(v . grad v, Lap v)` of a sampled velocity, products dealiased.
pub fn spatial_terms(fft: &Fft2, v: &[Vec<f64>; 2]) -> ([Vec<f64>; 2], [Vec<f64>; 2]) {
    let n2 = fft.n() * fft.n();
    let spec = [fft.forward(&v[0]), fft.forward(&v[1])];
    let zero = Complex64::new(0.0, 0.0);
    let mut adv = [vec![0.0; n2], vec![0.0; n2]];
    let mut lap = [vec![0.0; n2], vec![0.0; n2]];
    for c in 0..2 {
        let mut grads = [vec![0.0; n2], vec![0.0; n2]];
        for d in 0..2 {
            let s: Vec<Complex64> = spec[c]
                .iter()
                .enumerate()
                .map(|(i, z)| if fft.dealiased(i) { Complex64::new(0.0, fft.wavevector(i)[d]) * z } else { zero })
                .collect();
            grads[d] = fft.inverse(&s);
        }
        let prod: Vec<f64> = (0..n2).map(|p| v[0][p] * grads[0][p] + v[1][p] * grads[1][p]).collect();
        let mut ps = fft.forward(&prod);
        truncate(fft, &mut ps);
        adv[c] = fft.inverse(&ps);
        let l: Vec<Complex64> = spec[c]
            .iter()
            .enumerate()
            .map(|(i, z)| {
                let k = fft.wavevector(i);
                z * -(k[0] * k[0] + k[1] * k[1])
            })
            .collect();
        lap[c] = fft.inverse(&l);
    }
    (adv, lap)
}

impl VelocityField for SmoothedFamily {
    fn velocity(&self, t: f64, out: &mut [Vec<f64>; 2]) -> Result<()> {
        let mut memo = self.memo.lock().expect("velocity memo");
        if let Some((s, v)) = memo.as_ref() {
            if *s == t {
                out[0].copy_from_slice(&v[0]);
                out[1].copy_from_slice(&v[1]);
                return Ok(());
            }
        }
        let v = self.velocity_at(t);
        let peak = v[0].iter().zip(&v[1]).map(|(a, b)| a.hypot(*b)).fold(0.0, f64::max);
        if peak > self.sup_bound() {
            return Err(Error::Solver(format!("velocity {peak:.4e} at t = {t:.6} exceeds the step bound {:.4e}", self.sup_bound())));
        }
        out[0].copy_from_slice(&v[0]);
        out[1].copy_from_slice(&v[1]);
        *memo = Some((t, v));
        Ok(())
    }

    fn sup_bound(&self) -> f64 {
        (0..=self.schedule.m).map(|n| self.interval_bound(n, 0.0, 1.0)).fold(0.0, f64::max)
    }

    fn local_bound(&self, t0: f64, t1: f64) -> f64 {
        let mut b = 0.0f64;
        for n in 0..=self.schedule.m {
            let (a, h) = (TimeSchedule::junction(n), TimeSchedule::interval(n));
            let (lo, hi) = (t0.max(a), t1.min(a + h));
            if lo <= hi {
                b = b.max(self.interval_bound(n, (lo - a) / h, (hi - a) / h));
            }
        }
        b
    }

    fn vanishes_after(&self) -> Option<f64> {
        Some(self.schedule.end())
    }
}
