use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::block::BlockFrame;
use super::family::CurveFamily;
use super::profile::{build_cutoff, CutoffProfile};
use crate::error::Result;
use crate::grid::GridField;

/// Step of the centred time differences of the map family.
pub const TIME_STEP: f64 = 1e-4;

/// The building blocks `(V_i, Theta_i)` generated by a curve family.
#[derive(Debug, Clone)]
pub struct LocalFieldSet {
    family: Arc<dyn CurveFamily>,
    profile: CutoffProfile,
    dt: f64,
}

impl LocalFieldSet {
    pub fn new(family: Arc<dyn CurveFamily>) -> Result<Self> {
        let profile = build_cutoff(6, !family.is_closed())?;
        Ok(LocalFieldSet { family, profile, dt: TIME_STEP })
    }

    pub fn family(&self) -> &Arc<dyn CurveFamily> {
        &self.family
    }

    pub fn blocks(&self) -> usize {
        self.family.blocks()
    }

    pub fn profile(&self) -> &CutoffProfile {
        &self.profile
    }

    /// Every block frozen at time `t`.
    pub fn frames(&self, t: f64) -> Result<Vec<BlockFrame>> {
        let cm = self.family.curves(t - self.dt)?;
        let c0 = self.family.curves(t)?;
        let cp = self.family.curves(t + self.dt)?;
        cm.into_iter()
            .zip(c0)
            .zip(cp)
            .map(|((a, b), c)| BlockFrame::new([a, b, c], t, self.dt, self.family.radius(), self.profile.clone()))
            .collect()
    }

    pub fn frame(&self, block: usize, t: f64) -> Result<BlockFrame> {
        let f = &self.family;
        BlockFrame::new([f.curve(block, t - self.dt)?, f.curve(block, t)?, f.curve(block, t + self.dt)?], t, self.dt, f.radius(), self.profile.clone())
    }

    /// `(Theta_i, V_i)` on the `k x k` block grid for every block.
    pub fn evaluate_fields(&self, k: usize, t: f64) -> Result<Vec<(GridField, GridField)>> {
        Ok(self.frames(t)?.iter().map(|f| f.sample_grid(k)).collect())
    }
}

/// Transport defect of one block field.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TransportResidual {
    /// `sup |d_t Theta + V . grad Theta|` over the grid.
    pub residual: f64,
    /// `sup |grad Theta|`, the scale the residual is compared against.
    pub grad_sup: f64,
}

/// `d_t Theta + V . grad Theta` by finite differences on the `k x k` grid, per block.
pub fn transport_residual(set: &LocalFieldSet, k: usize, t: f64) -> Result<Vec<TransportResidual>> {
    let mut out = Vec::new();
    for f in set.frames(t)? {
        let (theta, vel) = f.sample_grid(k);
        let tp = f.sample_theta(k, 1);
        let tm = f.sample_theta(k, -1);
        let g = theta.gradient(0);
        let (mut res, mut gs) = (0.0f64, 0.0f64);
        for idx in 0..k * k {
            let dt = (tp.data()[idx] - tm.data()[idx]) / (2.0 * f.dt());
            let adv = vel.comp(0)[idx] * g[0][idx] + vel.comp(1)[idx] * g[1][idx];
            res = res.max((dt + adv).abs());
            gs = gs.max(g[0][idx].hypot(g[1][idx]));
        }
        out.push(TransportResidual { residual: res, grad_sup: gs });
    }
    Ok(out)
}

/// Pointwise divergence of `V` at the `k x k` cell centres of every block,
/// from a fourth-order centred stencil of step `DIV_STEP`. Returns the sup over
/// blocks together with the sup of `|grad V|` for scale.
pub fn velocity_divergence(set: &LocalFieldSet, k: usize, t: f64) -> Result<(f64, f64)> {
    const DIV_STEP: f64 = 1e-4;
    let h = 1.0 / k as f64;
    let mut div = 0.0f64;
    let mut grad = 0.0f64;
    for f in set.frames(t)? {
        let (d, g) = (0..k * k)
            .into_par_iter()
            .map(|idx| {
                let x = [(idx % k) as f64 * h + 0.5 * h, (idx / k) as f64 * h + 0.5 * h];
                let v = |dx: f64, dy: f64| f.velocity_at([x[0] + dx, x[1] + dy]);
                let a = DIV_STEP;
                let (xp, xm, xp2, xm2) = (v(a, 0.0), v(-a, 0.0), v(2.0 * a, 0.0), v(-2.0 * a, 0.0));
                let (yp, ym, yp2, ym2) = (v(0.0, a), v(0.0, -a), v(0.0, 2.0 * a), v(0.0, -2.0 * a));
                let d = |p: [f64; 2], m: [f64; 2], p2: [f64; 2], m2: [f64; 2], c: usize| (8.0 * (p[c] - m[c]) - (p2[c] - m2[c])) / (12.0 * a);
                let j = [
                    d(xp, xm, xp2, xm2, 0),
                    d(xp, xm, xp2, xm2, 1),
                    d(yp, ym, yp2, ym2, 0),
                    d(yp, ym, yp2, ym2, 1),
                ];
                ((j[0] + j[3]).abs(), j.iter().fold(0.0f64, |m, x| m.max(x.abs())))
            })
            .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
        div = div.max(d);
        grad = grad.max(g);
    }
    Ok((div, grad))
}

/// Largest discrete `C^1` distances `(|V~ - V|, |Theta~ - Theta|)` over the blocks.
pub fn field_stability_report(a: &LocalFieldSet, b: &LocalFieldSet, k: usize, t: f64) -> Result<(f64, f64)> {
    let fa = a.evaluate_fields(k, t)?;
    let fb = b.evaluate_fields(k, t)?;
    let (mut dv, mut dth) = (0.0f64, 0.0f64);
    for ((ta, va), (tb, vb)) in fa.iter().zip(&fb) {
        dv = dv.max(vb.minus(va).c1_norm());
        dth = dth.max(tb.minus(ta).c1_norm());
    }
    Ok((dv, dth))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::family::{CircleFamily, SnakeFamily};
    use crate::fields::perturbation::{PerturbationPlan, PerturbedFamily};

    #[test]
    fn static_family_has_no_velocity() {
        let set = LocalFieldSet::new(Arc::new(CircleFamily::fixed([0.5, 0.5], 0.3))).unwrap();
        let (theta, v) = &set.evaluate_fields(64, 0.5).unwrap()[0];
        assert_eq!(v.sup_norm(), 0.0);
        assert!(theta.sup_norm() > 0.1);
    }

    #[test]
    fn translation_gives_constant_velocity_in_the_core() {
        let set = LocalFieldSet::new(Arc::new(CircleFamily::translating([0.5, 0.5], 0.3, [0.2, -0.1]))).unwrap();
        let f = set.frame(0, 0.3).unwrap();
        for &(s, y) in &[(0.3, 0.0), (2.0, 0.01), (5.0, -0.012)] {
            let x = f.map().eval(s, y);
            let v = f.velocity_at(x);
            assert!((v[0] - 0.2).abs() < 1e-8 && (v[1] + 0.1).abs() < 1e-8, "{v:?}");
        }
    }

    #[test]
    fn rotation_matches_rigid_field() {
        let omega = 1.3;
        let set = LocalFieldSet::new(Arc::new(CircleFamily::rotating([0.5, 0.5], 0.3, omega))).unwrap();
        let f = set.frame(0, 0.4).unwrap();
        for &(s, y) in &[(0.3, 0.0), (2.0, 0.01), (5.0, -0.012)] {
            let x = f.map().eval(s, y);
            let v = f.velocity_at(x);
            let e = [-omega * (x[1] - 0.5), omega * (x[0] - 0.5)];
            assert!((v[0] - e[0]).abs() < 1e-6 && (v[1] - e[1]).abs() < 1e-6);
        }
    }

    #[test]
    fn block_fields_have_zero_mean_and_unit_norm() {
        let set = LocalFieldSet::new(Arc::new(SnakeFamily::default())).unwrap();
        for (theta, _) in set.evaluate_fields(400, 0.7).unwrap() {
            assert!(theta.integral(0).abs() < 1e-6, "{}", theta.integral(0));
            assert!((theta.l2_sq() - 1.0).abs() < 1e-6, "{}", theta.l2_sq());
        }
    }

    #[test]
    fn snake_velocity_is_divergence_free() {
        let set = LocalFieldSet::new(Arc::new(SnakeFamily::default())).unwrap();
        let (div, grad) = velocity_divergence(&set, 48, 0.35).unwrap();
        assert!(grad > 1.0);
        assert!(div < 1e-4, "{div}");
    }

    #[test]
    fn rotation_is_transported_to_grid_accuracy() {
        let set = LocalFieldSet::new(Arc::new(CircleFamily::rotating([0.5, 0.5], 0.3, 1.3))).unwrap();
        let coarse = transport_residual(&set, 256, 0.4).unwrap()[0];
        let fine = transport_residual(&set, 512, 0.4).unwrap()[0];
        assert!(fine.residual <= 1e-4 * fine.grad_sup, "{fine:?}");
        assert!(fine.residual <= 0.5 * coarse.residual);
    }

    #[test]
    fn static_family_has_zero_residual() {
        let set = LocalFieldSet::new(Arc::new(CircleFamily::fixed([0.5, 0.5], 0.3))).unwrap();
        assert_eq!(transport_residual(&set, 64, 0.5).unwrap()[0].residual, 0.0);
    }

    #[test]
    fn supports_stay_in_a_fixed_square() {
        let base: Arc<dyn CurveFamily> = Arc::new(SnakeFamily::default());
        let plan = PerturbationPlan::harmonic(base.as_ref(), 1e-2).unwrap();
        let sets = [
            LocalFieldSet::new(base.clone()).unwrap(),
            LocalFieldSet::new(Arc::new(PerturbedFamily::new(base.clone(), plan))).unwrap(),
        ];
        for set in &sets {
            for t in [0.0, 0.5, 1.0] {
                for (th, v) in set.evaluate_fields(64, t).unwrap() {
                    for g in [th, v] {
                        let b = g.support_box(0.0).unwrap();
                        assert!(b[0] >= 0.1 && b[1] <= 0.9 && b[2] >= 0.1 && b[3] <= 0.9, "{b:?}");
                    }
                }
            }
        }
    }
}
