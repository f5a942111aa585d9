//! Area and length constraints on normal perturbations.

use serde::Serialize;

use super::perturb::flat_weight;
use super::Curve;
use crate::error::{Error, Result};

const AREA_TOL: f64 = 1e-13;
const LENGTH_TOL: f64 = 1e-13;
const MAX_ITER: usize = 100;

/// Area swept on the `-eta` side: `int h dsigma - 1/2 int kappa h^2 dsigma`.
///
/// For a closed counter-clockwise curve this is the loss of enclosed area.
pub fn area_difference(curve: &Curve, h: &[f64]) -> f64 {
    let f = curve.frenet();
    let g: Vec<f64> = (0..curve.len()).map(|j| (h[j] - 0.5 * f.kappa[j] * h[j] * h[j]) * f.speed[j]).collect();
    curve.integrate(&g)
}

/// Length of `gamma + h eta`: `int sqrt(l^2 (1 - kappa h)^2 + h'^2) ds`.
pub fn length_after(curve: &Curve, h: &[f64]) -> f64 {
    let f = curve.frenet();
    let dh = curve.diff(1).apply(h);
    let g: Vec<f64> = (0..curve.len())
        .map(|j| (f.speed[j] * (1.0 - f.kappa[j] * h[j])).hypot(dh[j]))
        .collect();
    curve.integrate(&g)
}

/// `u - (int u dsigma) phi_0`, the component in the kernel of the linearised area map.
pub fn kernel_part(curve: &Curve, u: &[f64]) -> Vec<f64> {
    let phi = flat_weight(curve);
    let speed = curve.frenet().speed;
    let w: Vec<f64> = u.iter().zip(&speed).map(|(a, b)| a * b).collect();
    let m = curve.integrate(&w);
    u.iter().zip(&phi).map(|(a, p)| a - m * p).collect()
}

/// Find `alpha` with `area_difference(alpha phi_0 + u) = 0` and return that perturbation.
pub fn project_area_preserving(curve: &Curve, u: &[f64]) -> Result<Vec<f64>> {
    let phi = flat_weight(curve);
    let f = curve.frenet();
    let scale = curve.length().powi(2);
    let mut alpha = 0.0;
    for _ in 0..MAX_ITER {
        let h: Vec<f64> = u.iter().zip(&phi).map(|(a, p)| a + alpha * p).collect();
        let r = area_difference(curve, &h);
        if r.abs() <= AREA_TOL * scale {
            return Ok(h);
        }
        let g: Vec<f64> = (0..curve.len()).map(|j| phi[j] * (1.0 - f.kappa[j] * h[j]) * f.speed[j]).collect();
        let d = curve.integrate(&g);
        if d.abs() < 1e-14 {
            return Err(Error::Constraint("area derivative vanished".into()));
        }
        alpha -= r / d;
    }
    Err(Error::Constraint(format!("area projection stalled after {MAX_ITER} iterations")))
}

/// Residual defects after a constraint projection.
#[derive(Debug, Clone, Serialize)]
pub struct ConstraintReport {
    /// Area change of each curve.
    pub area_defects: Vec<f64>,
    /// Length of each curve minus the length of the first.
    pub length_defects: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl ConstraintReport {
    pub fn max_area_defect(&self) -> f64 {
        self.area_defects.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_length_defect(&self) -> f64 {
        self.length_defects.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Correction direction in the area kernel that moves the length at first order.
///
/// `phi_0 (kappa - <kappa>)` has first variation `-var(kappa)`, which is zero
/// only for constant curvature; circles fall back to a second harmonic that
/// changes length at second order.
fn length_direction(curve: &Curve) -> Vec<f64> {
    let phi = flat_weight(curve);
    let f = curve.frenet();
    let wk: Vec<f64> = (0..curve.len()).map(|j| phi[j] * f.kappa[j] * f.speed[j]).collect();
    let mean = curve.integrate(&wk);
    let z: Vec<f64> = (0..curve.len()).map(|j| phi[j] * (f.kappa[j] - mean)).collect();
    let var: f64 = {
        let g: Vec<f64> = (0..curve.len()).map(|j| f.kappa[j] * z[j] * f.speed[j]).collect();
        curve.integrate(&g)
    };
    let kscale = f.kappa.iter().fold(0.0f64, |m, k| m.max(k.abs())).max(1.0 / curve.length());
    let z = if var.abs() > 1e-6 * kscale * kscale {
        z
    } else {
        let l = curve.param_len();
        let raw: Vec<f64> = curve
            .nodes()
            .iter()
            .zip(&phi)
            .map(|(s, p)| p * (4.0 * std::f64::consts::PI * s / l).cos())
            .collect();
        kernel_part(curve, &raw)
    };
    let sup = z.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    z.into_iter().map(|v| v / sup).collect()
}

/// Adjust perturbations so every curve keeps its area and all reach the length of the first.
///
/// The length equations decouple: curve `i` only needs its own length to hit
/// the target set by curve 0, so each is a scalar root find along one kernel
/// direction, with the area projection reapplied at every trial point.
pub fn project_equal_length(curves: &[Curve], hs: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, ConstraintReport)> {
    if curves.is_empty() || curves.len() != hs.len() {
        return Err(Error::Constraint("need one perturbation per curve".into()));
    }
    let h0 = project_area_preserving(&curves[0], &hs[0])?;
    let target = length_after(&curves[0], &h0);
    let mut out = vec![h0];
    let mut iterations = 0;
    for (c, h) in curves.iter().zip(hs).skip(1) {
        let z = length_direction(c);
        let trial = |t: f64| -> Result<(Vec<f64>, f64)> {
            let u: Vec<f64> = h.iter().zip(&z).map(|(a, b)| a + t * b).collect();
            let p = project_area_preserving(c, &u)?;
            let r = length_after(c, &p) - target;
            Ok((p, r))
        };
        let (hi, it) = scalar_root(trial, LENGTH_TOL * target, 0.05 * c.default_physical_radius() * c.check_constant_speed(1.0).unwrap_or(1.0))?;
        iterations = iterations.max(it);
        out.push(hi);
    }
    let report = ConstraintReport {
        area_defects: curves.iter().zip(&out).map(|(c, h)| area_difference(c, h)).collect(),
        length_defects: curves.iter().zip(&out).map(|(c, h)| length_after(c, h) - target).collect(),
        iterations,
        converged: true,
    };
    Ok((out, report))
}

/// Safeguarded Newton/secant root of `f(t)` starting at zero.
fn scalar_root<F>(f: F, tol: f64, reach: f64) -> Result<(Vec<f64>, usize)>
where
    F: Fn(f64) -> Result<(Vec<f64>, f64)>,
{
    let (p0, r0) = f(0.0)?;
    if r0.abs() <= tol {
        return Ok((p0, 0));
    }
    // Probe for a bracket on both sides, widening geometrically.
    let mut step = 1e-6 * reach;
    let mut bracket = None;
    while step <= 1e3 * reach && bracket.is_none() {
        for &t in &[step, -step] {
            let (_, r) = f(t)?;
            if r.signum() != r0.signum() {
                bracket = Some(if t > 0.0 { (0.0, r0, t, r) } else { (t, r, 0.0, r0) });
                break;
            }
        }
        step *= 2.0;
    }
    let (mut a, mut fa, mut b, mut fb) =
        bracket.ok_or_else(|| Error::Constraint("no sign change found for the length equation".into()))?;
    for it in 1..=MAX_ITER {
        // Secant inside the bracket, bisection when it leaves.
        let mut t = b - fb * (b - a) / (fb - fa);
        if !(t > a.min(b) && t < a.max(b)) || it % 8 == 0 {
            t = 0.5 * (a + b);
        }
        let (p, r) = f(t)?;
        if r.abs() <= tol {
            return Ok((p, it));
        }
        if r.signum() == fa.signum() {
            a = t;
            fa = r;
        } else {
            b = t;
            fb = r;
        }
        if (b - a).abs() < 1e-17 * reach.max(1e-300) {
            return Ok((p, it));
        }
    }
    Err(Error::Constraint(format!("length projection stalled after {MAX_ITER} iterations")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn circle(r: f64, n: usize, clockwise: bool) -> Curve {
        let sg = if clockwise { -1.0 } else { 1.0 };
        Curve::from_fn(|s| [0.5 + r * (s / r).cos(), 0.5 + sg * r * (s / r).sin()], n, true, 2.0 * PI * r).unwrap()
    }

    #[test]
    fn circle_offset_area_matches_annulus() {
        // Clockwise orientation puts eta outside, so a constant h grows the disc.
        let (r, c) = (0.2, 0.01);
        let curve = circle(r, 256, true);
        let da = area_difference(&curve, &vec![c; 256]);
        let exact = PI * ((r + c).powi(2) - r * r);
        assert!((da - exact).abs() <= 1e-10 * exact, "{da} vs {exact}");
    }

    #[test]
    fn area_difference_matches_green_formula() {
        let c = Curve::from_fn(|s| [0.5 + 0.3 * s.cos(), 0.5 + 0.2 * s.sin()], 512, true, 2.0 * PI).unwrap();
        let h: Vec<f64> = c.nodes().iter().map(|s| 0.02 * (3.0 * s).sin() + 0.01).collect();
        let before = c.signed_area().unwrap();
        let after = super::super::perturb(&c, &h).unwrap().signed_area().unwrap();
        assert!((area_difference(&c, &h) - (before - after)).abs() < 1e-12);
    }

    #[test]
    fn length_formula_matches_resampled_curve() {
        let c = Curve::from_fn(|s| [0.5 + 0.3 * s.cos(), 0.5 + 0.2 * s.sin()], 512, true, 2.0 * PI).unwrap();
        let h: Vec<f64> = c.nodes().iter().map(|s| 0.02 * (3.0 * s).sin()).collect();
        let p = super::super::perturb(&c, &h).unwrap();
        assert!((length_after(&c, &h) - p.length()).abs() < 1e-11);
    }

    #[test]
    fn area_projection_on_ellipse() {
        let c = Curve::from_fn(|s| [0.5 + 0.3 * s.cos(), 0.5 + 0.2 * s.sin()], 512, true, 2.0 * PI).unwrap();
        let u: Vec<f64> = c.nodes().iter().map(|s| 0.01 * (s.sin() + (5.0 * s).cos())).collect();
        let h = project_area_preserving(&c, &u).unwrap();
        assert!(area_difference(&c, &h).abs() < 1e-12 * c.length().powi(2));
    }

    #[test]
    fn equal_length_gives_second_circle_a_bump() {
        let a = circle(0.2, 256, false);
        let b = a.clone();
        let bump = kernel_part(&a, &a.nodes().iter().map(|s| 1e-3 * (3.0 * s / 0.2).sin()).collect::<Vec<_>>());
        let (hs, rep) = project_equal_length(&[a.clone(), b.clone()], &[bump, vec![0.0; 256]]).unwrap();
        assert!(rep.max_length_defect() < 1e-10 * a.length());
        assert!(rep.max_area_defect() < 1e-10 * a.length().powi(2));
        assert!(hs[1].iter().any(|v| v.abs() > 1e-5));
    }
}
