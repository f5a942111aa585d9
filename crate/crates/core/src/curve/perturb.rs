use super::Curve;
use crate::error::{Error, Result};

/// `gamma + h eta`, node by node.
pub fn perturb(curve: &Curve, h: &[f64]) -> Result<Curve> {
    if h.len() != curve.len() {
        return Err(Error::Geometry(format!("perturbation has {} values for {} nodes", h.len(), curve.len())));
    }
    let f = curve.frenet();
    let pts = curve
        .points()
        .iter()
        .zip(h)
        .zip(&f.eta)
        .map(|((p, hj), e)| [p[0] + hj * e[0], p[1] + hj * e[1]])
        .collect();
    Curve::new(pts, curve.is_closed(), curve.param_len())
}

/// `sum_{j <= k} sup |d_s^j h|` on the curve's node grid.
pub fn c_k_norm(curve: &Curve, h: &[f64], k: usize) -> f64 {
    let mut total = h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for j in 1..=k {
        total += curve.diff(j).apply(h).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    }
    total
}

/// Flat weight proportional to `s^7 (L - s)^7`, normalised to `int phi dsigma = 1`.
pub fn flat_weight(curve: &Curve) -> Vec<f64> {
    let l = curve.param_len();
    let raw: Vec<f64> = curve.nodes().iter().map(|&s| (s / l * (1.0 - s / l)).powi(7)).collect();
    let speed = curve.frenet().speed;
    let w: Vec<f64> = raw.iter().zip(&speed).map(|(a, b)| a * b).collect();
    let norm = curve.integrate(&w);
    raw.into_iter().map(|v| v / norm).collect()
}

/// Exact and expanded stretch/curvature of a perturbed curve.
#[derive(Debug, Clone)]
pub struct PerturbedGeometry {
    pub speed: Vec<f64>,
    pub kappa: Vec<f64>,
    /// `J = l_tilde / l`.
    pub stretch: Vec<f64>,
    /// `l (1 - kappa h)`.
    pub speed_first_order: Vec<f64>,
    /// `kappa + kappa^2 h + h'' / l^2 - h' l' / l^3`; the last term vanishes at constant speed.
    pub kappa_first_order: Vec<f64>,
    /// `1 - kappa h + (h'/l)^2 / 2`.
    pub stretch_second_order: Vec<f64>,
}

pub fn stretch_and_curvature(curve: &Curve, h: &[f64]) -> Result<PerturbedGeometry> {
    let f = curve.frenet();
    let pf = perturb(curve, h)?.frenet();
    let dh = curve.diff(1).apply(h);
    let d2h = curve.diff(2).apply(h);
    let dl = curve.diff(1).apply(&f.speed);
    let n = curve.len();
    let mut g = PerturbedGeometry {
        speed: pf.speed.clone(),
        kappa: pf.kappa.clone(),
        stretch: Vec::with_capacity(n),
        speed_first_order: Vec::with_capacity(n),
        kappa_first_order: Vec::with_capacity(n),
        stretch_second_order: Vec::with_capacity(n),
    };
    for j in 0..n {
        let (l, k) = (f.speed[j], f.kappa[j]);
        g.stretch.push(pf.speed[j] / l);
        g.speed_first_order.push(l * (1.0 - k * h[j]));
        g.kappa_first_order.push(k + k * k * h[j] + d2h[j] / (l * l) - dh[j] * dl[j] / (l * l * l));
        g.stretch_second_order.push(1.0 - k * h[j] + 0.5 * (dh[j] / l).powi(2));
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn ellipse(n: usize) -> Curve {
        Curve::from_fn(|s| [0.5 + 0.3 * s.cos(), 0.5 + 0.2 * s.sin()], n, true, 2.0 * PI).unwrap()
    }

    fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn zero_perturbation_is_identity() {
        let c = ellipse(128);
        let p = perturb(&c, &vec![0.0; 128]).unwrap();
        assert_eq!(p, c);
    }

    #[test]
    fn circle_offset_changes_radius() {
        let r = 0.2;
        let c = Curve::from_fn(|s| [r * (s / r).cos(), r * (s / r).sin()], 256, true, 2.0 * PI * r).unwrap();
        // eta points inward on this circle, so h = c shrinks the radius by c
        let p = perturb(&c, &vec![0.01; 256]).unwrap();
        for q in p.points() {
            assert!((q[0].hypot(q[1]) - 0.19).abs() < 1e-12);
        }
        assert!((p.frenet().kappa[7] - 1.0 / 0.19).abs() < 1e-7);
    }

    #[test]
    fn first_order_curvature_error_is_quadratic() {
        // With l != 1 the second-derivative correction has to be divided by l^2.
        let c = Curve::from_fn(|s| [0.5 + 0.3 * s.cos(), 0.5 + 0.3 * s.sin()], 512, true, 2.0 * PI).unwrap();
        let bump: Vec<f64> = c.nodes().iter().map(|s| 0.1 * (3.0 * s).sin() + 0.05 * (2.0 * s).cos()).collect();
        let mut ratios = Vec::new();
        let mut wrong = Vec::new();
        for &e in &[1e-2, 1e-3, 1e-4] {
            let h: Vec<f64> = bump.iter().map(|v| e * v).collect();
            let g = stretch_and_curvature(&c, &h).unwrap();
            ratios.push(sup_diff(&g.kappa, &g.kappa_first_order) / (e * e));
            let f = c.frenet();
            let d2h = c.diff(2).apply(&h);
            let alt: Vec<f64> = (0..c.len()).map(|j| f.kappa[j] + f.kappa[j].powi(2) * h[j] + d2h[j] / f.speed[j]).collect();
            wrong.push(sup_diff(&g.kappa, &alt) / (e * e));
            assert!(sup_diff(&g.stretch, &g.stretch_second_order) < 50.0 * e * e);
        }
        assert!(ratios[2] < 2.0 * ratios[0] + 1.0, "{ratios:?}");
        assert!(wrong[2] > 50.0 * wrong[0], "{wrong:?}");
    }

    #[test]
    fn flat_weight_is_normalised() {
        let c = Curve::from_fn(|s| [s, 0.1 * s * s], 200, false, 1.0).unwrap();
        let w = flat_weight(&c);
        let f = c.frenet();
        let m: Vec<f64> = w.iter().zip(&f.speed).map(|(a, b)| a * b).collect();
        assert!((c.integrate(&m) - 1.0).abs() < 1e-14);
        assert!(w[0] == 0.0 && w[199] == 0.0);
    }
}
