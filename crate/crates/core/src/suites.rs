//! Curve, map and constraint checks run as suites over a family, with their
//! pass criteria, shared by the command line and the tests.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::area_map::{beta, beta_fixed_point, jacobian_defect, map_stability_report, TubularMap};
use crate::curve::{area_difference, Curve};
use crate::error::Result;
use crate::fields::{field_stability_report, CurveFamily, LocalFieldSet, PerturbationPlan, PerturbedFamily};
use crate::grid::GridField;
use crate::numerics::fit::loglog_slope;
use crate::qss::{BlockSamples, BlockSource};
use crate::smoothing::BlockCache;
use crate::spectral::{AdvectionDiffusion, SolverSettings, SteadyVelocity, VelocityField};

#[derive(Debug, Clone, Serialize)]
pub struct GeometrySettings {
    pub circle_radius: f64,
    pub offsets: Vec<f64>,
    pub circle_samples: usize,
    /// Times at which the family's maps are checked.
    pub times: Vec<f64>,
    /// Parameter grid for the Jacobian check.
    pub jacobian_grid: (usize, usize),
    pub area_tol: f64,
    pub jacobian_tol: f64,
    pub beta_tol: f64,
}

impl Default for GeometrySettings {
    fn default() -> Self {
        GeometrySettings {
            circle_radius: 0.2,
            offsets: vec![1e-3, 1e-2, 5e-2],
            circle_samples: 256,
            times: vec![0.0, 0.5, 1.0],
            jacobian_grid: (200, 9),
            area_tol: 1e-10,
            jacobian_tol: 1e-6,
            beta_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GeometryReport {
    /// Relative error of the swept-area formula against the annulus, per offset.
    pub area_errors: Vec<f64>,
    /// `max |det D Phi - 1|` over every block map at every time.
    pub jacobian_defect: f64,
    /// Largest `beta` fixed-point error relative to `|beta|`.
    pub beta_error: f64,
    pub maps_checked: usize,
    pub area_ok: bool,
    pub jacobian_ok: bool,
    pub beta_ok: bool,
}

impl GeometryReport {
    pub fn passed(&self) -> bool {
        self.area_ok && self.jacobian_ok && self.beta_ok
    }
}

/// Clockwise circle, so `eta` points out and a positive offset grows the disc.
fn clockwise_circle(r: f64, n: usize) -> Result<Curve> {
    Curve::from_fn(|s| [0.5 + r * (s / r).cos(), 0.5 - r * (s / r).sin()], n, true, 2.0 * PI * r)
}

/// Area formula on circles, unit Jacobian of every block map, and the `beta` fixed point.
pub fn geometry_suite(family: &dyn CurveFamily, settings: &GeometrySettings) -> Result<GeometryReport> {
    let r = settings.circle_radius;
    let circle = clockwise_circle(r, settings.circle_samples)?;
    let area_errors: Vec<f64> = settings
        .offsets
        .iter()
        .map(|&c| {
            let exact = PI * ((r + c).powi(2) - r * r);
            (area_difference(&circle, &vec![c; circle.len()]) - exact).abs() / exact
        })
        .collect();
    let mut jac = 0.0f64;
    let mut maps = 0;
    let mut beta_error = 0.0f64;
    for &t in &settings.times {
        for c in family.curves(t)? {
            let f = c.frenet();
            let map = TubularMap::new(c, family.radius())?;
            let h = 1e-5 * map.radius();
            jac = jac.max(jacobian_defect(&map, settings.jacobian_grid.0, settings.jacobian_grid.1, h));
            maps += 1;
            // Perturbed curvature and speed around a few nodes, against the closed-form root.
            for j in [0, f.kappa.len() / 3, 2 * f.kappa.len() / 3] {
                let (k, l) = (f.kappa[j], f.speed[j]);
                for &y in &[0.5 * map.radius(), -0.9 * map.radius()] {
                    let (kt, lt) = (k * (1.0 + 1e-3) + 1e-3, l * (1.0 - 1e-3));
                    let s = beta_fixed_point(k, l, kt, lt, y)?;
                    let exact = beta(kt, lt, y) - beta(k, l, y);
                    beta_error = beta_error.max((s.delta_beta - exact).abs() / beta(k, l, y).abs());
                }
            }
        }
    }
    Ok(GeometryReport {
        area_ok: area_errors.iter().all(|&e| e <= settings.area_tol),
        jacobian_ok: jac <= settings.jacobian_tol,
        beta_ok: beta_error <= settings.beta_tol,
        area_errors,
        jacobian_defect: jac,
        beta_error,
        maps_checked: maps,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstraintSuiteReport {
    pub eps: f64,
    pub seed: u64,
    pub max_area_defect: f64,
    pub max_length_defect: f64,
    pub area_bound: f64,
    pub length_bound: f64,
    pub iterations: usize,
}

impl ConstraintSuiteReport {
    pub fn passed(&self) -> bool {
        self.max_area_defect <= self.area_bound && self.max_length_defect <= self.length_bound
    }
}

/// Random kernel perturbations of all block curves at time 1, projected onto both constraints.
pub fn constraint_suite(family: &dyn CurveFamily, eps: f64, seed: u64, tol: f64) -> Result<ConstraintSuiteReport> {
    let plan = PerturbationPlan::random(family, eps, seed)?;
    let curves = family.curves(1.0)?;
    let (_, rep) = plan.perturbations(&curves, 1.0)?;
    let l = curves.iter().map(|c| c.length()).fold(0.0, f64::max);
    Ok(ConstraintSuiteReport {
        eps,
        seed,
        max_area_defect: rep.max_area_defect(),
        max_length_defect: rep.max_length_defect(),
        area_bound: tol * l * l,
        length_bound: tol * l,
        iterations: rep.iterations,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilitySettings {
    pub eps: Vec<f64>,
    /// Time of comparison; the perturbation has its full size at 1.
    pub t: f64,
    /// Parameter grid for the map distances.
    pub map_grid: (usize, usize),
    /// Block grid for the field distances.
    pub block_res: usize,
    pub slope_window: (f64, f64),
}

impl Default for StabilitySettings {
    fn default() -> Self {
        StabilitySettings { eps: vec![1e-1, 1e-2, 1e-3, 1e-4], t: 1.0, map_grid: (256, 9), block_res: 128, slope_window: (0.9, 1.1) }
    }
}

/// Distances between the base and perturbed objects at one `eps`, maximised over blocks.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StabilityRow {
    pub eps: f64,
    pub phi_c2: f64,
    pub psi_c1: f64,
    pub hausdorff: f64,
    pub velocity_c1: f64,
    pub theta_c1: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub rows: Vec<StabilityRow>,
    /// Log-log slopes in the order of the row fields.
    pub slopes: [f64; 5],
    pub window: (f64, f64),
}

impl StabilityReport {
    pub const QUANTITIES: [&'static str; 5] = ["phi_c2", "psi_c1", "hausdorff", "velocity_c1", "theta_c1"];

    pub fn passed(&self) -> bool {
        self.slopes.iter().all(|s| (self.window.0..=self.window.1).contains(s))
    }
}

/// How the map and field distances scale with the perturbation size.
pub fn stability_sweep(family: Arc<dyn CurveFamily>, settings: &StabilitySettings) -> Result<StabilityReport> {
    let base = LocalFieldSet::new(family.clone())?;
    let base_curves = family.curves(settings.t)?;
    let mut rows = Vec::new();
    for &eps in &settings.eps {
        let pert = PerturbedFamily::new(family.clone(), PerturbationPlan::harmonic(family.as_ref(), eps)?);
        let curves = pert.curves(settings.t)?.0;
        let mut row = StabilityRow { eps, phi_c2: 0.0, psi_c1: 0.0, hausdorff: 0.0, velocity_c1: 0.0, theta_c1: 0.0 };
        for (a, b) in base_curves.iter().zip(curves) {
            let ma = TubularMap::new(a.clone(), family.radius())?;
            let mb = TubularMap::new(b, family.radius())?;
            let r = map_stability_report(&ma, &mb, settings.map_grid.0, settings.map_grid.1);
            row.phi_c2 = row.phi_c2.max(r.phi_c2);
            row.psi_c1 = row.psi_c1.max(r.psi_c1);
            row.hausdorff = row.hausdorff.max(r.hausdorff);
        }
        let set = LocalFieldSet::new(Arc::new(pert))?;
        let (dv, dth) = field_stability_report(&base, &set, settings.block_res, settings.t)?;
        row.velocity_c1 = dv;
        row.theta_c1 = dth;
        rows.push(row);
    }
    let eps: Vec<f64> = rows.iter().map(|r| r.eps).collect();
    let fit = |f: fn(&StabilityRow) -> f64| loglog_slope(&eps, &rows.iter().map(f).collect::<Vec<_>>());
    let slopes = [fit(|r| r.phi_c2), fit(|r| r.psi_c1), fit(|r| r.hausdorff), fit(|r| r.velocity_c1), fit(|r| r.theta_c1)];
    Ok(StabilityReport { rows, slopes, window: settings.slope_window })
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverSuiteSettings {
    pub res: usize,
    pub heat_mu: f64,
    /// Wavenumbers of the decaying mode.
    pub heat_mode: [u32; 2],
    pub heat_time: f64,
    /// Length of the shear runs without and with viscosity.
    pub shear_time: f64,
    pub identity_mu: f64,
    /// Block, start time and length of the transport window.
    pub block: usize,
    pub window: (f64, f64),
    /// Chebyshev nodes for the velocity over the window.
    pub nodes: usize,
    pub cfl: f64,
    pub heat_tol: f64,
    pub conservation_tol: f64,
    pub identity_tol: f64,
    /// Allowed ratio of the transport error to the interpolation error.
    pub transport_factor: f64,
}

impl Default for SolverSuiteSettings {
    fn default() -> Self {
        SolverSuiteSettings {
            res: 512,
            heat_mu: 0.01,
            heat_mode: [3, 2],
            heat_time: 1.0,
            shear_time: 0.25,
            identity_mu: 2e-3,
            block: 0,
            window: (0.3, 0.1),
            nodes: 9,
            cfl: 0.5,
            heat_tol: 1e-6,
            conservation_tol: 1e-8,
            identity_tol: 1e-6,
            transport_factor: 10.0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverSuiteReport {
    pub res: usize,
    /// Relative L2 error of the decayed mode.
    pub heat_error: f64,
    /// `|E(T) / E(0) - 1|` without viscosity.
    pub conservation_error: f64,
    /// `|E(T) + 2 mu int ||grad theta||^2 - E(0)| / E(0)`.
    pub identity_error: f64,
    /// L2 distance between the solved and the constructed scalar at the end of the window.
    pub transport_error: f64,
    /// L2 distance between the constructed scalar and its bilinear interpolant from half resolution.
    pub interpolation_error: f64,
    pub steps: usize,
    pub heat_ok: bool,
    pub conservation_ok: bool,
    pub identity_ok: bool,
    pub transport_ok: bool,
}

impl SolverSuiteReport {
    pub fn passed(&self) -> bool {
        self.heat_ok && self.conservation_ok && self.identity_ok && self.transport_ok
    }
}

/// One block over a window of curve time, rescaled to block time `[0, 1]`.
struct WindowSource<'a> {
    set: &'a LocalFieldSet,
    block: usize,
    window: (f64, f64),
}

impl BlockSource for WindowSource<'_> {
    fn blocks(&self) -> usize {
        1
    }

    fn sample(&self, k: usize, tau: f64) -> Result<BlockSamples> {
        let (theta, vel) = self.set.frame(self.block, self.window.0 + tau * self.window.1)?.sample_grid(k);
        Ok(BlockSamples { k, tau, theta: vec![theta], vel: vec![vel] })
    }
}

/// The block velocity over the window, read from the node samples.
struct WindowVelocity {
    cache: BlockCache,
    span: f64,
    sup: f64,
}

impl VelocityField for WindowVelocity {
    fn velocity(&self, t: f64, out: &mut [Vec<f64>; 2]) -> Result<()> {
        let v = &self.cache.velocity(t / self.span)[0];
        out[0].copy_from_slice(v.comp(0));
        out[1].copy_from_slice(v.comp(1));
        Ok(())
    }

    fn sup_bound(&self) -> f64 {
        self.sup
    }
}

fn shear(n: usize) -> SteadyVelocity {
    SteadyVelocity::from_grid(&GridField::vector_from_fn(n, |x| [(2.0 * PI * x[1]).sin(), 0.0]))
}

/// Exact solutions and balances the advection-diffusion solver must reproduce,
/// and its agreement with a transported block of `set`.
pub fn solver_suite(set: &LocalFieldSet, settings: &SolverSuiteSettings) -> Result<SolverSuiteReport> {
    let n = settings.res;
    let mut steps = 0;
    let [a, b] = settings.heat_mode.map(|k| 2.0 * PI * k as f64);
    let mode = GridField::from_fn(n, |x| (a * x[0]).sin() * (b * x[1]).cos());
    let heat = AdvectionDiffusion::new(n, settings.heat_mu)?;
    let zero = SteadyVelocity { v: [vec![0.0; n * n], vec![0.0; n * n]] };
    let run = SolverSettings { dt: 0.1, cfl: settings.cfl, ..Default::default() };
    let out = heat.run(&zero, &mode, (0.0, settings.heat_time), run, &[], |_, _| Ok(()))?;
    steps += out.steps;
    let decay = (-settings.heat_mu * (a * a + b * b) * settings.heat_time).exp();
    let heat_error = out.final_state.to_grid(heat.fft()).l2_distance(&mode.scaled(decay)) / (decay * mode.l2_sq().sqrt());

    let cells = GridField::from_fn(n, |x| (2.0 * PI * x[0]).cos() * (2.0 * PI * x[1]).cos());
    let v = shear(n);
    let mut balance = |mu: f64| -> Result<(f64, f64)> {
        let s = AdvectionDiffusion::new(n, mu)?;
        let run = SolverSettings { dt: s.max_step(&v, settings.cfl), cfl: settings.cfl, ..Default::default() };
        let out = s.run(&v, &cells, (0.0, settings.shear_time), run, &[], |_, _| Ok(()))?;
        steps += out.steps;
        let (first, last) = (out.records[0], *out.records.last().expect("records"));
        Ok(((last.l2_sq / first.l2_sq - 1.0).abs(), ((last.l2_sq + 2.0 * last.dissipated_quadrature) / first.l2_sq - 1.0).abs()))
    };
    let conservation_error = balance(0.0)?.0;
    let identity_error = balance(settings.identity_mu)?.1;

    let (t0, span) = settings.window;
    let source = WindowSource { set, block: settings.block, window: settings.window };
    let cache = BlockCache::build(&source, n, settings.nodes)?;
    let samples = cache.samples();
    let (start, end) = (samples[0].theta[0].clone(), samples[samples.len() - 1].theta[0].clone());
    // Interpolation overshoots the node maximum slightly.
    let track = WindowVelocity { sup: 1.1 * cache.velocity_sup(), cache, span };
    let solver = AdvectionDiffusion::new(n, 0.0)?;
    let run = SolverSettings { dt: solver.max_step(&track, settings.cfl), cfl: settings.cfl, ..Default::default() };
    let out = solver.run(&track, &start, (0.0, span), run, &[], |_, _| Ok(()))?;
    steps += out.steps;
    let transport_error = out.final_state.to_grid(solver.fft()).l2_distance(&end);
    let coarse = set.frame(settings.block, t0 + span)?.sample_grid(n / 2).0;
    let interpolation_error = coarse.resample(n).l2_distance(&end);

    Ok(SolverSuiteReport {
        res: n,
        heat_error,
        conservation_error,
        identity_error,
        transport_error,
        interpolation_error,
        steps,
        heat_ok: heat_error <= settings.heat_tol,
        conservation_ok: conservation_error <= settings.conservation_tol,
        identity_ok: identity_error <= settings.identity_tol,
        transport_ok: transport_error <= settings.transport_factor * interpolation_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::CircleFamily;

    #[test]
    fn circle_family_passes_geometry() {
        let fam = CircleFamily::rotating([0.5, 0.5], 0.3, 0.7);
        let s = GeometrySettings { times: vec![0.5], jacobian_grid: (64, 5), ..Default::default() };
        let r = geometry_suite(&fam, &s).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.maps_checked, 1);
    }

    #[test]
    fn constraint_bounds_scale_with_length() {
        let fam = CircleFamily::fixed([0.5, 0.5], 0.3);
        let r = constraint_suite(&fam, 1e-3, 3, 1e-10).unwrap();
        let l = 2.0 * PI * 0.3;
        assert!((r.length_bound / (1e-10 * l) - 1.0).abs() < 1e-6);
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn solver_suite_on_a_coarse_grid() {
        let set = LocalFieldSet::new(Arc::new(CircleFamily::rotating([0.5, 0.5], 0.25, 0.6))).unwrap();
        let s = SolverSuiteSettings { res: 96, window: (0.2, 0.05), nodes: 5, ..Default::default() };
        let r = solver_suite(&set, &s).unwrap();
        assert!(r.heat_ok && r.conservation_ok && r.identity_ok, "{r:?}");
        assert!(r.transport_error.is_finite() && r.interpolation_error > 0.0);
    }
}
