//! The experiment subcommands. Each writes into its own subdirectory of the
//! output directory and returns the contracts it checked.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::config::{Config, FamilyKind};
use super::output::{write_csv, write_json, DiagnosticsCsvRow, DissipationCsvRow, ForcingCsvRow, Provenance};
use super::snapshot::Snapshot;
use crate::dissipation::{dissipation_study, DissipationSettings, StudySettings};
use crate::embed3d::{embed_experiment, EmbedSettings};
use crate::error::{Error, Result};
use crate::fields::{CircleFamily, CurveFamily, LocalFieldSet, SnakeFamily};
use crate::qss::{scaling_diagnostics, verify_recursion, BlockSource, BlockTable, ScalingSettings, TiledField};
use crate::smoothing::{forcing_sweep, BlockCache, ForcingSettings, SmoothedFamily, TimeSchedule};
use crate::suites::{constraint_suite, geometry_suite, stability_sweep, GeometrySettings, StabilitySettings, StabilityReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    GeometryCheck,
    BuildFamily,
    Scaling,
    Dissipate,
    StabilitySweep,
    Embed,
    Report,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::GeometryCheck,
        Command::BuildFamily,
        Command::Scaling,
        Command::Dissipate,
        Command::StabilitySweep,
        Command::Embed,
        Command::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::GeometryCheck => "geometry-check",
            Command::BuildFamily => "build-family",
            Command::Scaling => "scaling",
            Command::Dissipate => "dissipate",
            Command::StabilitySweep => "stability-sweep",
            Command::Embed => "embed",
            Command::Report => "report",
        }
    }
}

/// A named pass/fail check with the numbers behind it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Contract {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn contract(name: &str, passed: bool, detail: String) -> Contract {
    Contract { name: name.into(), passed, detail }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Outcome {
    pub command: String,
    pub contracts: Vec<Contract>,
}

impl Outcome {
    pub fn failures(&self) -> Vec<&Contract> {
        self.contracts.iter().filter(|c| !c.passed).collect()
    }

    /// 0 when every contract holds, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        i32::from(!self.failures().is_empty())
    }
}

pub fn curve_family(config: &Config) -> Arc<dyn CurveFamily> {
    match config.family {
        FamilyKind::Snake => Arc::new(SnakeFamily { blocks: config.blocks, ..SnakeFamily::default() }),
        FamilyKind::Circle => Arc::new(CircleFamily::rotating([0.5, 0.5], config.circle_radius, 0.6)),
    }
}

fn block_table(family: &dyn CurveFamily) -> BlockTable {
    BlockTable::peano(family.blocks())
}

fn subdir(out: &Path, cmd: Command) -> Result<PathBuf> {
    let d = out.join(cmd.name());
    std::fs::create_dir_all(&d)?;
    Ok(d)
}

/// Run one subcommand, writing its artifacts and `contracts.json` under `out/<name>/`.
pub fn run(cmd: Command, config: &Config, out: &Path) -> Result<Outcome> {
    let dir = subdir(out, cmd)?;
    let contracts = match cmd {
        Command::GeometryCheck => geometry_check(config, &dir)?,
        Command::BuildFamily => build_family(config, &dir)?,
        Command::Scaling => scaling(config, &dir)?,
        Command::Dissipate => dissipate(config, &dir)?,
        Command::StabilitySweep => stability(config, &dir)?,
        Command::Embed => embed(config, &dir)?,
        Command::Report => report(config, out, &dir)?,
    };
    let outcome = Outcome { command: cmd.name().into(), contracts };
    write_json(&dir.join("contracts.json"), &Provenance::new(config, &["harness::commands::run"]), &outcome)?;
    Ok(outcome)
}

fn geometry_check(config: &Config, dir: &Path) -> Result<Vec<Contract>> {
    let family = curve_family(config);
    let settings = GeometrySettings {
        circle_radius: config.circle_radius,
        offsets: config.offsets.clone(),
        times: config.geometry_times.clone(),
        area_tol: config.tol_area,
        jacobian_tol: config.tol_jacobian,
        beta_tol: config.tol_beta,
        ..GeometrySettings::default()
    };
    let g = geometry_suite(family.as_ref(), &settings)?;
    let c = constraint_suite(family.as_ref(), config.constraint_eps, config.seed, config.tol_constraint)?;
    let prov = Provenance::new(
        config,
        &["suites::geometry_suite", "curve::area_difference", "area_map::jacobian_defect", "area_map::beta_fixed_point", "suites::constraint_suite"],
    );
    write_json(&dir.join("geometry.json"), &prov, &(&g, &c))?;
    Ok(vec![
        contract("area_formula", g.area_ok, format!("max relative error {:.3e}", g.area_errors.iter().fold(0.0f64, |m, e| m.max(*e)))),
        contract("unit_jacobian", g.jacobian_ok, format!("max |det - 1| = {:.3e} over {} maps", g.jacobian_defect, g.maps_checked)),
        contract("beta_fixed_point", g.beta_ok, format!("max relative error {:.3e}", g.beta_error)),
        contract(
            "constraints",
            c.passed(),
            format!("area {:.3e} <= {:.1e}, length {:.3e} <= {:.1e}", c.max_area_defect, c.area_bound, c.max_length_defect, c.length_bound),
        ),
    ])
}

fn build_family(config: &Config, dir: &Path) -> Result<Vec<Contract>> {
    let family = curve_family(config);
    let table = block_table(family.as_ref());
    let set = LocalFieldSet::new(family)?;
    let mut files = Vec::new();
    let mut exact = true;
    for level in 0..=config.build_levels {
        let k = config.build_res / BlockTable::side(level);
        let assign = Arc::new(table.assignment(level));
        for tau in [0.0, 1.0] {
            let samples = set.sample(k, tau)?;
            let rho = TiledField::scalar(level, assign.clone(), &samples)?.materialise();
            let v = TiledField::velocity(level, assign.clone(), &samples)?.materialise();
            for (name, field) in [("rho", rho), ("v", v)] {
                let snap = Snapshot::new(field, tau, level as i32)?;
                let file = format!("{name}_n{level}_tau{}.qssf", tau as u8);
                let path = dir.join(&file);
                snap.save(&path)?;
                let back = Snapshot::load(&path)?;
                exact &= back.field.data().iter().zip(snap.field.data()).all(|(a, b)| a.to_bits() == b.to_bits()) && back == snap;
                files.push(file);
            }
        }
    }
    let recursion = (0..config.build_levels).map(|n| verify_recursion(&set, &table, n, config.build_res)).collect::<Result<Vec<_>>>()?;
    let prov = Provenance::new(config, &["qss::TiledField::materialise", "qss::verify_recursion", "harness::snapshot::Snapshot"]);
    write_json(&dir.join("family.json"), &prov, &serde_json::json!({ "snapshots": files, "recursion": recursion }))?;
    Ok(vec![contract("snapshot_round_trip", exact, format!("{} snapshots re-read bit for bit", files.len()))])
}

fn in_window(x: f64, lo: f64, hi: f64) -> bool {
    (lo..=hi).contains(&x)
}

fn scaling(config: &Config, dir: &Path) -> Result<Vec<Contract>> {
    let family = curve_family(config);
    let table = block_table(family.as_ref());
    let set = LocalFieldSet::new(family)?;
    let settings = ScalingSettings {
        n_max: config.n_max,
        alpha: config.alpha,
        tau: 0.5,
        block_res: config.block_res,
        spectral_res: config.spectral_res,
        mass_threshold: config.mass_threshold,
    };
    let r = scaling_diagnostics(&set, &table, settings)?;
    let mut rows = Vec::new();
    for row in &r.rows {
        let norms: [(&str, f64, f64); 7] = [
            ("grad_rho_sup", row.grad_rho_sup, r.slopes.grad_rho),
            ("v_holder", row.v_holder, r.slopes.v_holder),
            ("vgradv_holder", row.vgradv_holder, r.slopes.vgradv_holder),
            ("h_minus1", row.h_minus1, r.slopes.h_minus1),
            ("mean", row.mean, f64::NAN),
            ("l2_sq", row.l2_sq, f64::NAN),
            ("low_freq_mass", row.low_freq_mass, f64::NAN),
        ];
        for (norm, value, slope) in norms {
            rows.push(DiagnosticsCsvRow { level: row.level, norm: norm.into(), value, slope });
        }
    }
    write_csv(&dir.join("diagnostics.csv"), &rows)?;
    write_json(&dir.join("scaling.json"), &Provenance::new(config, &["qss::scaling_diagnostics", "numerics::fit::level_slope"]), &r)?;
    let s = r.slopes;
    let mean = r.rows.iter().map(|x| x.mean.abs()).fold(0.0, f64::max);
    let l2 = r.rows.iter().map(|x| (x.l2_sq - 1.0).abs()).fold(0.0, f64::max);
    Ok(vec![
        contract("grad_rho_slope", in_window(s.grad_rho, 0.9, 1.1), format!("{:.4} in [0.9, 1.1]", s.grad_rho)),
        contract("v_holder_slope", in_window(s.v_holder, -0.6, -0.4), format!("{:.4} in [-0.6, -0.4]", s.v_holder)),
        contract("vgradv_holder_slope", in_window(s.vgradv_holder, -0.6, -0.4), format!("{:.4} in [-0.6, -0.4]", s.vgradv_holder)),
        contract("h_minus1_slope", in_window(s.h_minus1, -1.1, -0.9), format!("{:.4} in [-1.1, -0.9]", s.h_minus1)),
        contract("zero_mean", mean <= 1e-6, format!("max |mean| {mean:.3e}")),
        contract("unit_l2", l2 <= 1e-4, format!("max |l2_sq - 1| {l2:.3e}")),
    ])
}

fn eps_tag(eps: f64) -> String {
    if eps == 0.0 {
        "0".into()
    } else {
        format!("{eps:e}")
    }
}

fn dissipate(config: &Config, dir: &Path) -> Result<Vec<Contract>> {
    let family = curve_family(config);
    let table = block_table(family.as_ref());
    let settings = StudySettings {
        run: DissipationSettings {
            cfl: config.cfl,
            max_dt: config.max_dt,
            checkpoints: config.checkpoints,
            lambda: config.lambda,
            tail_limit: config.tail_limit,
            ..DissipationSettings::default()
        },
        res: config.solver_res,
        sample_k: config.sample_k,
        nodes: config.cache_nodes,
        m_min: config.m_min,
        m_max: config.m_max,
        eps: config.dissipation_eps.clone(),
    };
    let study = dissipation_study(family, &table, &settings)?;
    for run in &study.runs {
        let r = &run.record;
        let rows: Vec<DissipationCsvRow> =
            r.series.iter().map(|s| DissipationCsvRow { m: r.m, mu: r.mu, t: s.t, grad_sq: s.grad_sq, d_partial: s.d_partial }).collect();
        write_csv(&dir.join(format!("dissipation_m{}_eps{}.csv", r.m, eps_tag(run.eps))), &rows)?;
    }
    let summary: Vec<_> = study
        .runs
        .iter()
        .map(|r| {
            serde_json::json!({
                "eps": r.eps, "m": r.record.m, "mu": r.record.mu, "D": r.record.dissipation, "steps": r.record.steps,
                "max_tail_fraction": r.record.max_tail_fraction, "comparisons": r.record.comparisons, "junctions": r.record.junctions,
            })
        })
        .collect();
    let ratios = study.ratios();
    let devs = study.deviations();
    let prov = Provenance::new(config, &["dissipation::dissipation_study", "dissipation::dissipation_run", "spectral::AdvectionDiffusion::run"]);
    write_json(&dir.join("dissipation.json"), &prov, &serde_json::json!({ "runs": summary, "ratios": ratios, "deviations": devs }))?;
    let ratio_ok = ratios.iter().all(|&(_, q)| in_window(q, config.ratio_min, config.ratio_max));
    let dev_max = devs.iter().map(|d| d.2).fold(0.0, f64::max);
    Ok(vec![
        contract("positive_dissipation", study.all_positive(), format!("{} runs", study.runs.len())),
        contract("dissipation_ratio", ratio_ok, format!("{ratios:?} in [{}, {}]", config.ratio_min, config.ratio_max)),
        contract("perturbation_stability", dev_max <= config.eps_tolerance, format!("max deviation {dev_max:.3e} <= {}", config.eps_tolerance)),
        contract("comparison_inequality", study.comparison_holds(), "nonnegative slack at every checkpoint".into()),
        contract("bernstein", study.bernstein_holds(), "every stored field".into()),
        contract("resolved", study.resolved(), format!("tail fraction <= {}", config.tail_limit)),
    ])
}

fn stability(config: &Config, dir: &Path) -> Result<Vec<Contract>> {
    let family = curve_family(config);
    let settings = StabilitySettings {
        eps: config.eps.clone(),
        block_res: config.stability_block_res,
        slope_window: (config.slope_min, config.slope_max),
        ..StabilitySettings::default()
    };
    let r = stability_sweep(family, &settings)?;
    write_csv(&dir.join("stability.csv"), &r.rows)?;
    let prov = Provenance::new(config, &["suites::stability_sweep", "area_map::map_stability_report", "fields::field_stability_report"]);
    write_json(&dir.join("stability.json"), &prov, &r)?;
    Ok(StabilityReport::QUANTITIES
        .iter()
        .zip(r.slopes)
        .map(|(q, s)| contract(&format!("{q}_slope"), in_window(s, r.window.0, r.window.1), format!("{s:.4} in [{}, {}]", r.window.0, r.window.1)))
        .collect())
}

fn embed(config: &Config, dir: &Path) -> Result<Vec<Contract>> {
    let family = curve_family(config);
    let table = block_table(family.as_ref());
    let set = LocalFieldSet::new(family)?;
    let fs = ForcingSettings { m_max: config.forcing_m_max, alpha: config.alpha, block_res: config.forcing_block_res, times: config.forcing_times };
    let forcing = forcing_sweep(&set, &table, fs)?;
    let rows: Vec<ForcingCsvRow> =
        forcing.iter().map(|f| ForcingCsvRow { m: f.m, mu: f.mu, forcing: f.forcing, transport: f.transport, viscous: f.viscous }).collect();
    write_csv(&dir.join("forcing.csv"), &rows)?;
    let cache = BlockCache::build(&set, config.embed_sample_k, config.embed_nodes)?;
    let fam = SmoothedFamily::new(&cache, &table, TimeSchedule::new(config.embed_m)?, config.embed_res)?;
    let es = EmbedSettings { times: config.embed_times, seed: config.seed, step: config.embed_step, cfl: config.cfl, max_dt: config.max_dt, ..EmbedSettings::default() };
    let report = embed_experiment(&fam, &es)?;
    let prov = Provenance::new(config, &["embed3d::embed_experiment", "embed3d::ns_residual", "embed3d::lift", "smoothing::forcing_sweep"]);
    write_json(&dir.join("residual.json"), &prov, &serde_json::json!({ "residual": report, "forcing": forcing }))?;
    let (g1, v1) = (forcing[0].forcing, forcing[0].viscous);
    let g_dev = forcing.iter().skip(1).map(|f| (f.forcing / g1 - 1.0).abs()).fold(0.0, f64::max);
    let v_growth = forcing.iter().skip(1).map(|f| f.viscous / v1).fold(0.0, f64::max);
    let worst = report.samples.iter().map(|s| s.horizontal.max(s.vertical) / s.budget).fold(0.0, f64::max);
    let identity = report.identities.iter().map(|c| c.relative_defect).fold(0.0, f64::max);
    Ok(vec![
        contract("forcing_bounded", g_dev <= config.forcing_tolerance, format!("max |g_m / g_1 - 1| = {g_dev:.3e}")),
        contract("viscous_bounded", v_growth <= 1.0 + config.forcing_tolerance, format!("max viscous_m / viscous_1 = {v_growth:.3e}")),
        contract("gradient_identity", report.identities_hold(config.tol_identity), format!("max relative defect {identity:.3e}")),
        contract("vertical_forcing_zero", report.identities.iter().all(|c| c.forcing_vertical == 0.0), "f_3 identically zero".into()),
        contract("residual_budget", report.residuals_hold(), format!("max residual / budget {worst:.3e}")),
        contract("dissipation_budget", report.dissipation.holds(), format!("{:?}", report.dissipation)),
    ])
}

#[derive(Debug, Clone, Serialize)]
struct SummaryRow {
    command: String,
    contract: String,
    passed: bool,
}

/// Collect every `contracts.json` already in `out` into one summary.
fn report(config: &Config, out: &Path, dir: &Path) -> Result<Vec<Contract>> {
    let mut rows = Vec::new();
    let mut found = Vec::new();
    for cmd in Command::ALL.iter().filter(|c| **c != Command::Report) {
        let path = out.join(cmd.name()).join("contracts.json");
        if !path.exists() {
            continue;
        }
        let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path)?)?;
        let outcome: Outcome = serde_json::from_value(doc["data"].clone())?;
        for c in &outcome.contracts {
            rows.push(SummaryRow { command: outcome.command.clone(), contract: c.name.clone(), passed: c.passed });
        }
        found.push(outcome);
    }
    if found.is_empty() {
        return Err(Error::Contract(format!("no subcommand output found in {}", out.display())));
    }
    write_csv(&dir.join("summary.csv"), &rows)?;
    write_json(&dir.join("summary.json"), &Provenance::new(config, &["harness::commands::report"]), &found)?;
    Ok(found
        .iter()
        .map(|o| {
            let failed: Vec<&str> = o.failures().iter().map(|c| c.name.as_str()).collect();
            contract(&o.command, failed.is_empty(), if failed.is_empty() { "all contracts hold".into() } else { format!("failed: {}", failed.join(", ")) })
        })
        .collect())
}
