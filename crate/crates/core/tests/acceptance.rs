//! Acceptance criteria at desk scale. Each test prints one PASS/FAIL line.
//!
//! The criteria run one at a time so the runtime budgets mean something. Set
//! `QSSLAB_DISSIPATION_RES` (a multiple of 250, with `sample_k` a quarter of it)
//! to run the dissipation study on a smaller grid.

use std::io::Write;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use qsslab::dissipation::{dissipation_study, StudySettings};
use qsslab::embed3d::{embed_experiment, EmbedSettings};
use qsslab::fields::{CurveFamily, LocalFieldSet, SnakeFamily};
use qsslab::harness::Config;
use qsslab::qss::{scaling_diagnostics, BlockTable, ScalingSettings};
use qsslab::smoothing::{forcing_sweep, BlockCache, ForcingSettings, SmoothedFamily, TimeSchedule};
use qsslab::suites::{constraint_suite, geometry_suite, solver_suite, stability_sweep, GeometrySettings, SolverSuiteSettings, StabilitySettings};

static SERIAL: Mutex<()> = Mutex::new(());

fn snake() -> Arc<dyn CurveFamily> {
    Arc::new(SnakeFamily::default())
}

/// Print the verdict past the test harness capture, then assert it.
fn verdict(id: u32, name: &str, passed: bool, budget: Duration, elapsed: Duration, detail: String) {
    let ok = passed && elapsed <= budget;
    let line = format!(
        "{} [{id}] {name}: {detail} (runtime {:.1?} of {:.0?})\n",
        if ok { "PASS" } else { "FAIL" },
        elapsed,
        budget
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(ok, "{}", line.trim_end());
}

fn window(x: f64, lo: f64, hi: f64) -> bool {
    (lo..=hi).contains(&x)
}

#[test]
fn geometry_oracles() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let r = geometry_suite(snake().as_ref(), &GeometrySettings::default()).unwrap();
    let area = r.area_errors.iter().fold(0.0f64, |m, e| m.max(*e));
    let detail = format!("area {area:.2e} <= 1e-10, det {:.2e} <= 1e-6, beta {:.2e} <= 1e-10", r.jacobian_defect, r.beta_error);
    verdict(1, "geometry oracles", r.passed(), Duration::from_secs(10), start.elapsed(), detail);
}

#[test]
fn stability_slopes() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let r = stability_sweep(snake(), &StabilitySettings::default()).unwrap();
    let detail = format!("slopes {:.3?} in [0.9, 1.1]", r.slopes);
    verdict(2, "stability slopes", r.passed(), Duration::from_secs(300), start.elapsed(), detail);
}

#[test]
fn constraint_solvers() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let fam = snake();
    let mut passed = true;
    let (mut area, mut length) = (0.0f64, 0.0f64);
    // Every seed perturbs all six curves at once.
    for seed in 1..=6 {
        let r = constraint_suite(fam.as_ref(), 1e-3, seed, 1e-10).unwrap();
        passed &= r.passed();
        area = area.max(r.max_area_defect / r.area_bound * 1e-10);
        length = length.max(r.max_length_defect / r.length_bound * 1e-10);
    }
    let detail = format!("|dA| / L^2 = {area:.2e}, max |L_i - L_1| / L = {length:.2e}, both <= 1e-10");
    verdict(3, "constraint solvers", passed, Duration::from_secs(60), start.elapsed(), detail);
}

#[test]
fn quasi_self_similar_scaling() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let set = LocalFieldSet::new(snake()).unwrap();
    let table = BlockTable::peano(set.blocks());
    let r = scaling_diagnostics(&set, &table, ScalingSettings::default()).unwrap();
    let s = r.slopes;
    let mean = r.rows.iter().map(|x| x.mean.abs()).fold(0.0, f64::max);
    let l2 = r.rows.iter().map(|x| (x.l2_sq - 1.0).abs()).fold(0.0, f64::max);
    let passed = window(s.grad_rho, 0.9, 1.1)
        && window(s.v_holder, -0.6, -0.4)
        && window(s.vgradv_holder, -0.6, -0.4)
        && window(s.h_minus1, -1.1, -0.9)
        && mean <= 1e-6
        && l2 <= 1e-4;
    let detail = format!(
        "slopes grad {:.3}, v {:.3}, v.grad v {:.3}, H^-1 {:.3}; |mean| {mean:.1e}, |l2 - 1| {l2:.1e}",
        s.grad_rho, s.v_holder, s.vgradv_holder, s.h_minus1
    );
    verdict(4, "quasi-self-similar scaling", passed, Duration::from_secs(600), start.elapsed(), detail);
}

#[test]
fn solver_verification() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let set = LocalFieldSet::new(snake()).unwrap();
    let r = solver_suite(&set, &SolverSuiteSettings::default()).unwrap();
    let detail = format!(
        "heat {:.1e} <= 1e-6, inviscid {:.1e} <= 1e-8, identity {:.1e} <= 1e-6, transport {:.1e} <= 10 x {:.1e}",
        r.heat_error, r.conservation_error, r.identity_error, r.transport_error, r.interpolation_error
    );
    verdict(5, "solver verification", r.passed(), Duration::from_secs(300), start.elapsed(), detail);
}

#[test]
fn dissipation_stability() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let mut settings = StudySettings::default();
    if let Ok(res) = std::env::var("QSSLAB_DISSIPATION_RES") {
        settings.res = res.parse().expect("QSSLAB_DISSIPATION_RES must be an integer");
        settings.sample_k = settings.res / 4;
    }
    let fam = snake();
    let table = BlockTable::peano(fam.blocks());
    let study = dissipation_study(fam, &table, &settings).unwrap();
    let ratios = study.ratios();
    let dev = study.deviations().iter().map(|d| d.2).fold(0.0, f64::max);
    let slack = study.runs.iter().flat_map(|r| r.record.comparisons.iter().map(|c| c.slack)).fold(f64::INFINITY, f64::min);
    let passed = study.all_positive()
        && ratios.iter().all(|r| window(r.1, 0.5, 2.0))
        && dev <= 0.2
        && study.comparison_holds()
        && study.bernstein_holds();
    let d: Vec<f64> = study.runs.iter().map(|r| r.record.dissipation).collect();
    let detail = format!(
        "res {}, D {d:.6?}, ratios {:.4?} in [0.5, 2], max |D(eps)/D(0) - 1| {dev:.1e} <= 0.2, min slack {slack:.2}, bernstein {}",
        settings.res,
        ratios.iter().map(|r| r.1).collect::<Vec<_>>(),
        study.bernstein_holds()
    );
    verdict(6, "dissipation stability", passed, Duration::from_secs(3600), start.elapsed(), detail);
}

#[test]
fn forcing_boundedness() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let c = Config::defaults();
    let set = LocalFieldSet::new(snake()).unwrap();
    let table = BlockTable::peano(set.blocks());
    let fs = ForcingSettings { m_max: 3, alpha: c.alpha, block_res: c.forcing_block_res, times: c.forcing_times };
    let f = forcing_sweep(&set, &table, fs).unwrap();
    let (g1, v1) = (f[0].forcing, f[0].viscous);
    let g_dev = f.iter().skip(1).map(|x| (x.forcing / g1 - 1.0).abs()).fold(0.0, f64::max);
    let v_growth = f.iter().skip(1).map(|x| x.viscous / v1).fold(0.0, f64::max);
    let norms: Vec<String> = f.iter().map(|x| format!("{:.3e}", x.forcing)).collect();
    let detail = format!("||g^m|| [{}], max |g_m / g_1 - 1| {g_dev:.2e} <= 0.2, viscous growth {v_growth:.2e} <= 1.2", norms.join(", "));
    verdict(7, "forcing boundedness", g_dev <= 0.2 && v_growth <= 1.2, Duration::from_secs(600), start.elapsed(), detail);
}

#[test]
fn embedding_identities() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let c = Config::defaults();
    let set = LocalFieldSet::new(snake()).unwrap();
    let table = BlockTable::peano(set.blocks());
    let cache = BlockCache::build(&set, c.embed_sample_k, c.embed_nodes).unwrap();
    let fam = SmoothedFamily::new(&cache, &table, TimeSchedule::new(c.embed_m).unwrap(), c.embed_res).unwrap();
    let es = EmbedSettings { times: c.embed_times, seed: c.seed, step: c.embed_step, cfl: c.cfl, max_dt: c.max_dt, ..EmbedSettings::default() };
    let r = embed_experiment(&fam, &es).unwrap();
    let defect = r.identities.iter().map(|x| x.relative_defect).fold(0.0, f64::max);
    let vertical = r.identities.iter().all(|x| x.forcing_vertical == 0.0);
    let worst = r.samples.iter().map(|s| s.horizontal.max(s.vertical) / s.budget).fold(0.0, f64::max);
    let passed = r.identities_hold(1e-10) && vertical && r.residuals_hold();
    let detail = format!("gradient identity {defect:.1e} <= 1e-10, f_3 == 0 {vertical}, residual / budget {worst:.2e} <= 1");
    verdict(8, "3D embedding identities", passed, Duration::from_secs(120), start.elapsed(), detail);
}
