use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::family::CurveFamily;
use crate::curve::{c_k_norm, kernel_part, perturb, project_area_preserving, project_equal_length, ConstraintReport, Curve};
use crate::error::{Error, Result};

/// Small normal perturbations `h_i(t, s) = eps a(t) u_i(s)` of every block curve,
/// projected back onto the area (and optionally equal-length) constraints.
///
/// Shapes are normalised to unit discrete `C^6` norm after removing their
/// mean, so `eps` is the amplitude in that norm; `a(t) = sin^2(pi t / 2)`
/// vanishes at `t = 0`.
#[derive(Debug, Clone)]
pub struct PerturbationPlan {
    pub eps: f64,
    pub shapes: Vec<Vec<f64>>,
    pub equal_length: bool,
}

/// Weight flat at both ends of an open curve, `(4 s (L - s) / L^2)^7`.
fn end_weight(s: f64, l: f64, closed: bool) -> f64 {
    if closed {
        1.0
    } else {
        (4.0 * s * (l - s) / (l * l)).powi(7)
    }
}

fn normalise(curve: &Curve, raw: Vec<f64>) -> Vec<f64> {
    let k = kernel_part(curve, &raw);
    let n = c_k_norm(curve, &k, 6);
    raw.into_iter().map(|v| v / n).collect()
}

impl PerturbationPlan {
    pub fn time_profile(t: f64) -> f64 {
        (0.5 * PI * t).sin().powi(2)
    }

    /// One harmonic per block, with block-dependent frequency and phase.
    pub fn harmonic(family: &dyn CurveFamily, eps: f64) -> Result<Self> {
        check_eps(eps)?;
        let mut shapes = Vec::new();
        for i in 0..family.blocks() {
            let c = family.curve(i, 0.0)?;
            let l = c.param_len();
            let f = (i + if c.is_closed() { 2 } else { 1 }) as f64;
            let raw = c
                .nodes()
                .iter()
                .map(|&s| end_weight(s, l, c.is_closed()) * (2.0 * PI * f * s / l + 0.3 * i as f64).sin())
                .collect();
            shapes.push(normalise(&c, raw));
        }
        Ok(PerturbationPlan { eps, shapes, equal_length: family.blocks() > 1 })
    }

    /// Random low-frequency shapes drawn from a seeded generator.
    pub fn random(family: &dyn CurveFamily, eps: f64, seed: u64) -> Result<Self> {
        check_eps(eps)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut shapes = Vec::new();
        for i in 0..family.blocks() {
            let c = family.curve(i, 0.0)?;
            let l = c.param_len();
            let modes: Vec<(f64, f64)> = (1..=4).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(0.0..2.0 * PI))).collect();
            let raw = c
                .nodes()
                .iter()
                .map(|&s| {
                    let w: f64 = modes.iter().enumerate().map(|(k, (a, p))| a * (2.0 * PI * (k + 1) as f64 * s / l + p).sin()).sum();
                    end_weight(s, l, c.is_closed()) * w
                })
                .collect();
            shapes.push(normalise(&c, raw));
        }
        Ok(PerturbationPlan { eps, shapes, equal_length: family.blocks() > 1 })
    }

    /// Constrained perturbations of the given block curves at time `t`.
    pub fn perturbations(&self, curves: &[Curve], t: f64) -> Result<(Vec<Vec<f64>>, ConstraintReport)> {
        let a = self.eps * Self::time_profile(t);
        let us: Vec<Vec<f64>> = curves
            .iter()
            .zip(&self.shapes)
            .map(|(c, u)| kernel_part(c, &u.iter().map(|v| a * v).collect::<Vec<_>>()))
            .collect();
        if self.equal_length && curves.len() > 1 {
            project_equal_length(curves, &us)
        } else {
            let hs: Vec<Vec<f64>> = curves.iter().zip(&us).map(|(c, u)| project_area_preserving(c, u)).collect::<Result<_>>()?;
            let report = ConstraintReport {
                area_defects: curves.iter().zip(&hs).map(|(c, h)| crate::curve::area_difference(c, h)).collect(),
                length_defects: vec![0.0; curves.len()],
                iterations: 0,
                converged: true,
            };
            Ok((hs, report))
        }
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(0.0..=0.1).contains(&eps) {
        return Err(Error::Fields(format!("perturbation amplitude {eps} outside [0, 0.1]")));
    }
    Ok(())
}

/// A family whose curves are the constrained perturbations of a base family.
#[derive(Debug, Clone)]
pub struct PerturbedFamily {
    pub base: Arc<dyn CurveFamily>,
    pub plan: PerturbationPlan,
}

impl PerturbedFamily {
    pub fn new(base: Arc<dyn CurveFamily>, plan: PerturbationPlan) -> Self {
        PerturbedFamily { base, plan }
    }

    /// All perturbed block curves at time `t`, with the constraint report.
    pub fn curves(&self, t: f64) -> Result<(Vec<Curve>, ConstraintReport)> {
        if self.plan.eps == 0.0 {
            let c = self.base.curves(t)?;
            let n = c.len();
            return Ok((c, ConstraintReport { area_defects: vec![0.0; n], length_defects: vec![0.0; n], iterations: 0, converged: true }));
        }
        let base: Vec<Curve> = (0..self.base.blocks()).map(|i| self.base.curve(i, t)).collect::<Result<_>>()?;
        let (hs, rep) = self.plan.perturbations(&base, t)?;
        let out = base.iter().zip(&hs).map(|(c, h)| perturb(c, h)).collect::<Result<_>>()?;
        Ok((out, rep))
    }
}

impl CurveFamily for PerturbedFamily {
    fn name(&self) -> String {
        format!("{}+eps{:e}", self.base.name(), self.plan.eps)
    }
    fn blocks(&self) -> usize {
        self.base.blocks()
    }
    fn is_closed(&self) -> bool {
        self.base.is_closed()
    }
    fn param_len(&self) -> f64 {
        self.base.param_len()
    }
    fn samples(&self) -> usize {
        self.base.samples()
    }
    fn radius(&self) -> f64 {
        self.base.radius()
    }
    fn curve(&self, block: usize, t: f64) -> Result<Curve> {
        if self.plan.eps == 0.0 {
            return self.base.curve(block, t);
        }
        if !self.plan.equal_length {
            let c = self.base.curve(block, t)?;
            let (hs, _) = self.plan.perturbations(std::slice::from_ref(&c), t)?;
            return perturb(&c, &hs[0]);
        }
        Ok(PerturbedFamily::curves(self, t)?.0.swap_remove(block))
    }
    fn curves(&self, t: f64) -> Result<Vec<Curve>> {
        Ok(PerturbedFamily::curves(self, t)?.0)
    }
}
