use serde::Serialize;

use super::map::TubularMap;
use crate::numerics::fd::{diff_axis, Diff1d};

/// Distances between a map and its perturbation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MapStabilityReport {
    /// Sampled `C^2` distance of `Phi_tilde - Phi` on the parameter rectangle.
    pub phi_c2: f64,
    /// Sampled `C^1` distance of the inverses on the common image.
    pub psi_c1: f64,
    /// Two-sided Hausdorff distance of the tube images.
    pub hausdorff: f64,
}

/// Uniform parameter grid of a map: `ns` nodes in `s`, `ny` in `y`.
pub(crate) fn param_grid(map: &TubularMap, ns: usize, ny: usize) -> (Vec<f64>, Vec<f64>) {
    let l = map.param_len();
    let s = if map.is_closed() {
        (0..ns).map(|i| l * i as f64 / ns as f64).collect()
    } else {
        (0..ns).map(|i| l * i as f64 / (ns - 1) as f64).collect()
    };
    let r = map.radius();
    let y = (0..ny).map(|j| r * (2.0 * j as f64 / (ny - 1) as f64 - 1.0)).collect();
    (s, y)
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn map_stability_report(map: &TubularMap, perturbed: &TubularMap, ns: usize, ny: usize) -> MapStabilityReport {
    MapStabilityReport {
        phi_c2: phi_c2_distance(map, perturbed, ns, ny),
        psi_c1: psi_c1_distance(map, perturbed, ns, ny),
        hausdorff: hausdorff(map, perturbed, 4 * ns),
    }
}

fn phi_c2_distance(a: &TubularMap, b: &TubularMap, ns: usize, ny: usize) -> f64 {
    let (sg, yg) = param_grid(a, ns, ny);
    let hs = sg[1] - sg[0];
    let hy = yg[1] - yg[0];
    let mut total = 0.0;
    for comp in 0..2 {
        let mut d = vec![0.0; ns * ny];
        for (j, &y) in yg.iter().enumerate() {
            for (i, &s) in sg.iter().enumerate() {
                d[j * ns + i] = b.eval(s, y)[comp] - a.eval(s, y)[comp];
            }
        }
        let s1 = Diff1d::new(ns, hs, 1, 6, a.is_closed());
        let s2 = Diff1d::new(ns, hs, 2, 6, a.is_closed());
        let y1 = Diff1d::new(ny, hy, 1, 6, false);
        let y2 = Diff1d::new(ny, hy, 2, 6, false);
        let ds = diff_axis(&d, ns, ny, 0, &s1);
        let dy = diff_axis(&d, ns, ny, 1, &y1);
        let dss = diff_axis(&d, ns, ny, 0, &s2);
        let dyy = diff_axis(&d, ns, ny, 1, &y2);
        let dsy = diff_axis(&ds, ns, ny, 1, &y1);
        let c = sup(&d) + sup(&ds) + sup(&dy) + sup(&dss) + sup(&dyy) + sup(&dsy);
        total = f64::max(total, c);
    }
    total
}

fn psi_c1_distance(a: &TubularMap, b: &TubularMap, ns: usize, ny: usize) -> f64 {
    let (sg, yg) = param_grid(a, ns, ny);
    let l = a.param_len();
    let (mut c0, mut c1) = (0.0f64, 0.0f64);
    for &y in &yg {
        for &s in &sg {
            let x = a.eval(s, y);
            let Some((st, yt)) = b.newton(x, s, y).filter(|&(st, yt)| b.in_domain(st, yt)) else {
                continue;
            };
            let mut dsv = st - s;
            if a.is_closed() {
                dsv -= l * (dsv / l).round();
            }
            c0 = c0.max(dsv.abs()).max((yt - y).abs());
            let (ga, ha) = a.jet(s, y).inverse();
            let (gb, hb) = b.jet(st, yt).inverse();
            for k in 0..2 {
                c1 = c1.max((gb[k] - ga[k]).abs()).max((hb[k] - ha[k]).abs());
            }
        }
    }
    c0 + c1
}

/// Parametrised pieces of the tube boundary: `(piece, parameter)`.
fn boundary_samples(m: &TubularMap, n: usize) -> Vec<(usize, f64, [f64; 2])> {
    let l = m.param_len();
    let r = m.radius();
    let mut out = Vec::new();
    let count = if m.is_closed() { n } else { n + 1 };
    for i in 0..count {
        let s = l * i as f64 / n as f64;
        out.push((0, s, m.eval(s, r)));
        out.push((1, s, m.eval(s, -r)));
    }
    if !m.is_closed() {
        let nc = (n / 8).max(16);
        for j in 0..=nc {
            let y = r * (2.0 * j as f64 / nc as f64 - 1.0);
            out.push((2, y, m.eval(0.0, y)));
            out.push((3, y, m.eval(l, y)));
        }
    }
    out
}

fn piece_point(m: &TubularMap, piece: usize, p: f64) -> [f64; 2] {
    match piece {
        0 => m.eval(p, m.radius()),
        1 => m.eval(p, -m.radius()),
        2 => m.eval(0.0, p),
        _ => m.eval(m.param_len(), p),
    }
}

/// Distance from `x` to the boundary of the tube, refined by golden-section search.
fn boundary_distance(m: &TubularMap, samples: &[(usize, f64, [f64; 2])], spacing: [f64; 2], x: [f64; 2]) -> f64 {
    let d2 = |p: [f64; 2]| (p[0] - x[0]).powi(2) + (p[1] - x[1]).powi(2);
    let (k, _) = samples
        .iter()
        .enumerate()
        .map(|(k, s)| (k, d2(s.2)))
        .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
    let (piece, p0, _) = samples[k];
    let h = if piece < 2 { spacing[0] } else { spacing[1] };
    let (mut a, mut b) = (p0 - h, p0 + h);
    if piece < 2 && !m.is_closed() {
        a = a.max(0.0);
        b = b.min(m.param_len());
    }
    if piece >= 2 {
        a = a.max(-m.radius());
        b = b.min(m.radius());
    }
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let f = |p: f64| d2(piece_point(m, piece, p));
    let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..60 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    fc.min(fd).sqrt()
}

fn one_sided(from: &TubularMap, to: &TubularMap, n: usize) -> f64 {
    let targets = boundary_samples(to, n);
    let spacing = [to.param_len() / n as f64, 2.0 * to.radius() / ((n / 8).max(16)) as f64];
    boundary_samples(from, n)
        .iter()
        .filter(|(_, _, x)| to.invert(*x).is_none())
        .map(|(_, _, x)| boundary_distance(to, &targets, spacing, *x))
        .fold(0.0, f64::max)
}

/// Two-sided Hausdorff distance of the tube images from `n` boundary samples per side.
pub fn hausdorff(a: &TubularMap, b: &TubularMap, n: usize) -> f64 {
    one_sided(a, b, n).max(one_sided(b, a, n))
}

/// Largest `|det D Phi - 1|` on an `ns x ny` grid, by centred differences of step `h`.
pub fn jacobian_defect(map: &TubularMap, ns: usize, ny: usize, h: f64) -> f64 {
    let (sg, yg) = param_grid(map, ns, ny);
    let mut worst = 0.0f64;
    for &y in &yg {
        let y = y.clamp(-map.radius() + h, map.radius() - h);
        for &s in &sg {
            let s = if map.is_closed() { s } else { s.clamp(h, map.param_len() - h) };
            let (sp, sm) = (map.eval(s + h, y), map.eval(s - h, y));
            let (yp, ym) = (map.eval(s, y + h), map.eval(s, y - h));
            let a = [(sp[0] - sm[0]) / (2.0 * h), (sp[1] - sm[1]) / (2.0 * h)];
            let b = [(yp[0] - ym[0]) / (2.0 * h), (yp[1] - ym[1]) / (2.0 * h)];
            worst = worst.max((a[0] * b[1] - a[1] * b[0] - 1.0).abs());
        }
    }
    worst
}
