//! The vanishing-viscosity experiment: `theta^m` solved with `mu_m` under `v^m`,
//! its dissipation, and the comparison with the transported `rho^m`.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::bump::smooth_step;
use crate::numerics::quad::gauss_legendre;
use crate::fields::{CurveFamily, LocalFieldSet, PerturbationPlan, PerturbedFamily};
use crate::qss::{BlockTable, TiledField};
use crate::smoothing::{BlockCache, SmoothedFamily, TimeSchedule};
use crate::spectral::{AdvectionDiffusion, BernsteinCheck, Fft2, SolverSettings, SpectralField};

#[derive(Debug, Clone, Serialize)]
pub struct DissipationSettings {
    /// Courant number of the adaptive steps.
    pub cfl: f64,
    /// Largest step.
    pub max_dt: f64,
    /// Evenly spaced comparison times in `(0, 1]`.
    pub checkpoints: usize,
    /// Gauss points per interval for `int ||grad rho^m||^2`.
    pub quadrature: usize,
    /// Cutoffs for the Bernstein check, angular.
    pub bernstein_cutoffs: Vec<f64>,
    /// `Lambda` of the frequency-concentration cutoff `Lambda 5^n`.
    pub lambda: f64,
    /// Tail energy fraction above which a run is flagged under-resolved.
    pub tail_limit: f64,
}

impl Default for DissipationSettings {
    fn default() -> Self {
        let tp = 2.0 * std::f64::consts::PI;
        DissipationSettings {
            cfl: 0.9,
            max_dt: 2e-3,
            checkpoints: 10,
            quadrature: 12,
            bernstein_cutoffs: vec![tp * 4.0, tp * 16.0, tp * 64.0],
            lambda: 27.9,
            tail_limit: 0.01,
        }
    }
}

/// One row of the dissipation time series.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SeriesRow {
    pub t: f64,
    pub grad_sq: f64,
    /// `mu int_0^t ||grad theta||^2`.
    pub d_partial: f64,
}

/// Both sides of the `L^2` comparison between `rho^m` and `theta^m` at one time.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ComparisonCheck {
    pub t: f64,
    /// `||rho^m - theta^m||^2` at this time.
    pub distance_sq: f64,
    /// Running maximum over the checkpoints so far.
    pub sup_distance_sq: f64,
    /// `2 mu int_0^t ||grad theta||^2`.
    pub theta_dissipation: f64,
    /// `2 mu int_0^t ||grad rho^m||^2`.
    pub rho_dissipation: f64,
    /// `sqrt(theta_dissipation rho_dissipation) - sup_distance_sq`.
    pub slack: f64,
}

/// Frequency content of `theta^m` at a junction `t_n`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct JunctionCheck {
    pub n: u32,
    pub t: f64,
    pub cutoff: f64,
    pub low_freq_mass: f64,
    pub h_minus1: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DissipationRecord {
    pub m: u32,
    pub mu: f64,
    pub res: usize,
    /// `D_m = mu int_0^1 ||grad theta^m||^2`.
    pub dissipation: f64,
    pub series: Vec<SeriesRow>,
    pub comparisons: Vec<ComparisonCheck>,
    pub junctions: Vec<JunctionCheck>,
    pub bernstein: Vec<BernsteinCheck>,
    pub max_tail_fraction: f64,
    pub under_resolved: bool,
    pub steps: usize,
}

impl DissipationRecord {
    pub fn comparison_holds(&self) -> bool {
        self.comparisons.iter().all(|c| c.slack >= 0.0)
    }

    pub fn bernstein_holds(&self) -> bool {
        self.bernstein.iter().all(|b| b.holds())
    }
}

/// `||grad rho_n(., tau)||^2 = sum_i count_i ||grad Theta_i(., tau)||^2`, from the finest blocks.
fn grad_rho_sq(fam: &SmoothedFamily, tiling: &[Arc<Vec<u16>>], n: u32, tau: f64) -> Result<f64> {
    let blocks = fam.level_cache(0).scalar(tau);
    Ok(TiledField::new(n, tiling[n as usize].clone(), blocks, 1.0)?.gradient()?.l2_sq())
}

/// `int_a^b ||grad rho^m||^2 dt` for `a, b` inside one interval `n <= m`.
fn grad_rho_integral(fam: &SmoothedFamily, tiling: &[Arc<Vec<u16>>], n: u32, a: f64, b: f64, rule: &(Vec<f64>, Vec<f64>)) -> Result<f64> {
    let (t0, dt) = (TimeSchedule::junction(n), TimeSchedule::interval(n));
    let mut acc = 0.0;
    for (x, w) in rule.0.iter().zip(&rule.1) {
        let t = 0.5 * (a + b) + 0.5 * (b - a) * x;
        acc += w * grad_rho_sq(fam, tiling, n, smooth_step((t - t0) / dt))?;
    }
    Ok(0.5 * (b - a) * acc)
}

/// Cumulative `int_0^t ||grad rho^m||^2` at each of `times` (sorted).
fn grad_rho_cumulative(fam: &SmoothedFamily, times: &[f64], quadrature: usize) -> Result<Vec<f64>> {
    let m = fam.schedule().m;
    let end = fam.schedule().end();
    let tiling: Vec<_> = (0..=m).map(|n| fam.level_tiling(n)).collect();
    let rule = gauss_legendre(quadrature);
    let frozen = grad_rho_sq(fam, &tiling, m, 1.0)?;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let mut acc = 0.0;
        for n in 0..=m {
            let (a, b) = (TimeSchedule::junction(n), TimeSchedule::junction(n + 1));
            if t <= a {
                break;
            }
            acc += grad_rho_integral(fam, &tiling, n, a, b.min(t), &rule)?;
        }
        if t > end {
            acc += frozen * (t - end);
        }
        out.push(acc);
    }
    Ok(out)
}

/// Drops the mean, conserved by the flow and left at `O(1e-8)` by the sampling.
pub fn mean_free(mut f: SpectralField) -> SpectralField {
    f.coeffs[0] = Default::default();
    f
}

fn distance_sq(fft: &Fft2, a: &SpectralField, b: &SpectralField) -> f64 {
    a.coeffs.iter().zip(&b.coeffs).enumerate().map(|(i, (p, q))| fft.weight(i) * (p - q).norm_sqr()).sum()
}

/// Solve `d_t theta + v^m . grad theta = mu_m Lap theta` on `[0, 1]` from `theta(0) = rho^m(0)`
/// and record the dissipation, the comparison with `rho^m`, and the spectral checks.
pub fn dissipation_run(fam: &SmoothedFamily, settings: &DissipationSettings) -> Result<DissipationRecord> {
    if settings.checkpoints == 0 {
        return Err(Error::Config("dissipation run needs at least one checkpoint".into()));
    }
    let schedule = fam.schedule();
    let (m, mu) = (schedule.m, schedule.viscosity());
    let solver = AdvectionDiffusion::new(fam.res(), mu)?;
    let fft = solver.fft().clone();
    let theta0 = mean_free(fam.density_spectrum(0.0)?).to_grid(&fft);
    let checks: Vec<f64> = (1..=settings.checkpoints).map(|j| j as f64 / settings.checkpoints as f64).collect();
    let junction_times: Vec<f64> = (0..=m + 1).map(TimeSchedule::junction).collect();
    let mut stops: Vec<f64> = checks.iter().chain(&junction_times).copied().collect();
    stops.sort_by(f64::total_cmp);
    stops.dedup();
    let rho_grad = grad_rho_cumulative(fam, &checks, settings.quadrature)?;
    let mut comparisons = Vec::new();
    let mut junctions = Vec::new();
    let mut bernstein = Vec::new();
    let mut sup = 0.0f64;
    let run = solver.run(
        fam,
        &theta0,
        (0.0, 1.0),
        SolverSettings { dt: settings.max_dt, cfl: settings.cfl, extinction: 0.0, adaptive: true },
        &stops,
        |rec, theta| {
            for k in &settings.bernstein_cutoffs {
                bernstein.push(theta.bernstein(&fft, *k));
            }
            if let Some(n) = junction_times.iter().position(|&s| (s - rec.t).abs() < 1e-12) {
                let cutoff = settings.lambda * 5f64.powi(n as i32);
                junctions.push(JunctionCheck {
                    n: n as u32,
                    t: rec.t,
                    cutoff,
                    low_freq_mass: theta.low_freq_mass(&fft, cutoff),
                    h_minus1: theta.h_minus1_norm(&fft)?,
                });
            }
            if let Some(j) = checks.iter().position(|&s| (s - rec.t).abs() < 1e-12) {
                let rho = mean_free(fam.density_spectrum(rec.t)?);
                let d = distance_sq(&fft, &rho, theta);
                sup = sup.max(d);
                let theta_diss = 2.0 * rec.dissipated;
                let rho_diss = 2.0 * mu * rho_grad[j];
                comparisons.push(ComparisonCheck {
                    t: rec.t,
                    distance_sq: d,
                    sup_distance_sq: sup,
                    theta_dissipation: theta_diss,
                    rho_dissipation: rho_diss,
                    slack: (theta_diss * rho_diss).sqrt() - sup,
                });
            }
            Ok(())
        },
    )?;
    let max_tail = run.records.iter().map(|r| r.tail_fraction).fold(0.0, f64::max);
    let series = run.records.iter().map(|r| SeriesRow { t: r.t, grad_sq: r.grad_sq, d_partial: r.dissipated }).collect();
    Ok(DissipationRecord {
        m,
        mu,
        res: fam.res(),
        dissipation: run.records.last().map_or(0.0, |r| r.dissipated),
        series,
        comparisons,
        junctions,
        bernstein,
        max_tail_fraction: max_tail,
        under_resolved: max_tail > settings.tail_limit,
        steps: run.steps,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct StudySettings {
    pub run: DissipationSettings,
    /// Solver grid.
    pub res: usize,
    /// Block cells of the time cache; blocks are sampled on a `2 k` grid.
    pub sample_k: usize,
    /// Chebyshev-Lobatto nodes in block time.
    pub nodes: usize,
    pub m_min: u32,
    pub m_max: u32,
    /// Perturbation sizes; the first is the reference.
    pub eps: Vec<f64>,
}

impl Default for StudySettings {
    fn default() -> Self {
        StudySettings { run: DissipationSettings::default(), res: 1000, sample_k: 250, nodes: 33, m_min: 1, m_max: 2, eps: vec![0.0, 1e-3, 1e-2] }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StudyRun {
    pub eps: f64,
    pub record: DissipationRecord,
}

/// `D_m` over a range of `m` for a base family and its perturbations.
#[derive(Debug, Clone, Serialize)]
pub struct DissipationStudy {
    pub runs: Vec<StudyRun>,
}

impl DissipationStudy {
    fn reference(&self, m: u32) -> Option<&DissipationRecord> {
        let eps0 = self.runs.first()?.eps;
        self.runs.iter().find(|r| r.eps == eps0 && r.record.m == m).map(|r| &r.record)
    }

    pub fn all_positive(&self) -> bool {
        self.runs.iter().all(|r| r.record.dissipation > 0.0)
    }

    /// `D_{m+1} / D_m` of the reference family.
    pub fn ratios(&self) -> Vec<(u32, f64)> {
        let eps0 = self.runs.first().map_or(0.0, |r| r.eps);
        let refs: Vec<&DissipationRecord> = self.runs.iter().filter(|r| r.eps == eps0).map(|r| &r.record).collect();
        refs.windows(2).map(|w| (w[0].m, w[1].dissipation / w[0].dissipation)).collect()
    }

    /// `(eps, m, |D_m(eps) / D_m(eps_0) - 1|)` for every perturbed run.
    pub fn deviations(&self) -> Vec<(f64, u32, f64)> {
        let eps0 = self.runs.first().map_or(0.0, |r| r.eps);
        self.runs
            .iter()
            .filter(|r| r.eps != eps0)
            .filter_map(|r| self.reference(r.record.m).map(|d| (r.eps, r.record.m, (r.record.dissipation / d.dissipation - 1.0).abs())))
            .collect()
    }

    pub fn comparison_holds(&self) -> bool {
        self.runs.iter().all(|r| r.record.comparison_holds())
    }

    pub fn bernstein_holds(&self) -> bool {
        self.runs.iter().all(|r| r.record.bernstein_holds())
    }

    pub fn resolved(&self) -> bool {
        self.runs.iter().all(|r| !r.record.under_resolved)
    }
}

/// Run [`dissipation_run`] for every `eps` and `m`; one block cache per `eps`.
pub fn dissipation_study(base: Arc<dyn CurveFamily>, table: &BlockTable, settings: &StudySettings) -> Result<DissipationStudy> {
    if settings.eps.is_empty() {
        return Err(Error::Config("dissipation_eps needs at least one value".into()));
    }
    let mut runs = Vec::new();
    for &eps in &settings.eps {
        let fam: Arc<dyn CurveFamily> = if eps == 0.0 {
            base.clone()
        } else {
            Arc::new(PerturbedFamily::new(base.clone(), PerturbationPlan::harmonic(base.as_ref(), eps)?))
        };
        let set = LocalFieldSet::new(fam)?;
        let cache = BlockCache::build(&set, settings.sample_k, settings.nodes)?;
        for m in settings.m_min..=settings.m_max {
            let smoothed = SmoothedFamily::new(&cache, table, TimeSchedule::new(m)?, settings.res)?;
            runs.push(StudyRun { eps, record: dissipation_run(&smoothed, &settings.run)? });
        }
    }
    Ok(DissipationStudy { runs })
}
