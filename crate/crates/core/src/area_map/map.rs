use super::beta::beta;
use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::numerics::fd::LocalInterp;

const INTERP_POINTS: usize = 10;
const SEED_ROWS: usize = 9;

/// Curve data at one parameter value.
#[derive(Debug, Clone, Copy)]
pub struct LocalFrame {
    pub gamma: [f64; 2],
    pub tau: [f64; 2],
    pub eta: [f64; 2],
    pub l: f64,
    pub kappa: f64,
    pub dl: f64,
    pub dkappa: f64,
}

/// Value and first derivatives of the map at one point.
#[derive(Debug, Clone, Copy)]
pub struct MapJet {
    pub x: [f64; 2],
    pub ds: [f64; 2],
    pub dy: [f64; 2],
}

impl MapJet {
    pub fn det(&self) -> f64 {
        self.ds[0] * self.dy[1] - self.ds[1] * self.dy[0]
    }

    /// Rows of the inverse Jacobian: `(grad s, grad y)`.
    pub fn inverse(&self) -> ([f64; 2], [f64; 2]) {
        let d = self.det();
        ([self.dy[1] / d, -self.dy[0] / d], [-self.ds[1] / d, self.ds[0] / d])
    }
}

#[derive(Debug, Clone)]
struct SeedIndex {
    origin: [f64; 2],
    cell: f64,
    dims: [usize; 2],
    buckets: Vec<Vec<u32>>,
    params: Vec<[f64; 2]>,
    images: Vec<[f64; 2]>,
}

impl SeedIndex {
    /// Up to `N` seeds closest to `x`, nearest first.
    fn nearest<const N: usize>(&self, x: [f64; 2]) -> ([usize; N], usize) {
        let cx = ((x[0] - self.origin[0]) / self.cell).floor() as isize;
        let cy = ((x[1] - self.origin[1]) / self.cell).floor() as isize;
        let mut best = [(f64::INFINITY, 0usize); N];
        for j in cy - 1..=cy + 1 {
            for i in cx - 1..=cx + 1 {
                if i < 0 || j < 0 || i >= self.dims[0] as isize || j >= self.dims[1] as isize {
                    continue;
                }
                for &k in &self.buckets[j as usize * self.dims[0] + i as usize] {
                    let p = self.images[k as usize];
                    let d = (p[0] - x[0]).powi(2) + (p[1] - x[1]).powi(2);
                    if d < best[N - 1].0 {
                        let mut at = N - 1;
                        while at > 0 && best[at - 1].0 > d {
                            best[at] = best[at - 1];
                            at -= 1;
                        }
                        best[at] = (d, k as usize);
                    }
                }
            }
        }
        let found = best.iter().filter(|b| b.0.is_finite()).count();
        (best.map(|b| b.1), found)
    }
}

/// The tube map of a sampled curve over `[0, L] x [-r, r]`, with its inverse.
///
/// The half-width `r` is measured in the `y` variable, whose physical offset
/// is roughly `y / l`.
#[derive(Debug, Clone)]
pub struct TubularMap {
    curve: Curve,
    interp: LocalInterp,
    radius: f64,
    seeds: SeedIndex,
}

impl TubularMap {
    pub fn new(curve: Curve, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::Map("tube radius must be positive".into()));
        }
        let f = curve.frenet();
        if let Some(j) = (0..curve.len()).find(|&j| 2.0 * f.kappa[j].abs() * radius / f.speed[j] >= 1.0) {
            return Err(Error::Map(format!("tube too wide for the curvature at node {j}")));
        }
        let interp = LocalInterp::new(curve.len(), curve.spacing(), 0.0, curve.is_closed(), INTERP_POINTS);
        let mut m = TubularMap {
            curve,
            interp,
            radius,
            seeds: SeedIndex { origin: [0.0; 2], cell: 1.0, dims: [0, 0], buckets: vec![], params: vec![], images: vec![] },
        };
        m.seeds = m.build_seeds();
        Ok(m)
    }

    fn build_seeds(&self) -> SeedIndex {
        let mean_l = self.curve.length() / self.curve.param_len();
        let width = 2.0 * self.radius / mean_l;
        let ns = ((self.curve.length() / (0.25 * width)).ceil() as usize).max(32);
        let (l, closed) = (self.curve.param_len(), self.curve.is_closed());
        let mut params = Vec::new();
        let mut images = Vec::new();
        for i in 0..ns + usize::from(!closed) {
            let s = l * i as f64 / ns as f64;
            for j in 0..SEED_ROWS {
                let y = self.radius * (2.0 * j as f64 / (SEED_ROWS - 1) as f64 - 1.0);
                params.push([s, y]);
                images.push(self.eval(s, y));
            }
        }
        // Bucket size covers the largest gap between neighbouring seeds.
        let step_s = self.curve.length() / ns as f64 * (1.0 + 2.0 * self.radius * self.curve.sup_curvature() / mean_l);
        let cell = step_s.max(width / (SEED_ROWS - 1) as f64) * 1.5;
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in &images {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let origin = [lo[0] - cell, lo[1] - cell];
        let dims = [((hi[0] - origin[0]) / cell) as usize + 2, ((hi[1] - origin[1]) / cell) as usize + 2];
        let mut buckets = vec![Vec::new(); dims[0] * dims[1]];
        for (k, p) in images.iter().enumerate() {
            let i = ((p[0] - origin[0]) / cell) as usize;
            let j = ((p[1] - origin[1]) / cell) as usize;
            buckets[j * dims[0] + i].push(k as u32);
        }
        SeedIndex { origin, cell, dims, buckets, params, images }
    }

    pub fn interp(&self) -> &LocalInterp {
        &self.interp
    }

    pub fn curve(&self) -> &Curve {
        &self.curve
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn param_len(&self) -> f64 {
        self.curve.param_len()
    }

    pub fn is_closed(&self) -> bool {
        self.curve.is_closed()
    }

    pub fn frame(&self, s: f64) -> LocalFrame {
        let mut d = [[0.0; 2]; 4];
        let pts = self.curve.points();
        self.interp.eval_into(s, 3, |i| pts[i], &mut d);
        let [g, g1, g2, g3] = d;
        let l = g1[0].hypot(g1[1]);
        let tau = [g1[0] / l, g1[1] / l];
        let kappa = (g1[0] * g2[1] - g1[1] * g2[0]) / (l * l * l);
        let dl = (g1[0] * g2[0] + g1[1] * g2[1]) / l;
        let dkappa = (g1[0] * g3[1] - g1[1] * g3[0]) / (l * l * l) - 3.0 * kappa * dl / l;
        LocalFrame { gamma: g, tau, eta: [-tau[1], tau[0]], l, kappa, dl, dkappa }
    }

    /// `Phi(s, y)`; NaN outside the map's domain of definition.
    pub fn eval(&self, s: f64, y: f64) -> [f64; 2] {
        let f = self.frame(s);
        let b = beta(f.kappa, f.l, y);
        [f.gamma[0] + b * f.eta[0], f.gamma[1] + b * f.eta[1]]
    }

    pub fn jet(&self, s: f64, y: f64) -> MapJet {
        let f = self.frame(s);
        jet_from_frame(&f, y)
    }

    /// Whether `(s, y)` lies in the closed parameter rectangle.
    pub fn in_domain(&self, s: f64, y: f64) -> bool {
        let tol = 1e-12;
        y.abs() <= self.radius * (1.0 + tol)
            && (self.is_closed() || (s >= -tol * self.param_len() && s <= self.param_len() * (1.0 + tol)))
    }

    /// `Psi(x) = (s, y)` if `x` lies in the tube image.
    pub fn invert(&self, x: [f64; 2]) -> Option<(f64, f64)> {
        let (cands, found) = self.seeds.nearest::<4>(x);
        for &k in &cands[..found] {
            let [s0, y0] = self.seeds.params[k];
            if let Some((s, y)) = self.newton(x, s0, y0) {
                return self.in_domain(s, y).then_some((s, y));
            }
        }
        None
    }

    /// Newton iteration for `Phi(s, y) = x` from a starting guess.
    pub fn newton(&self, x: [f64; 2], mut s: f64, mut y: f64) -> Option<(f64, f64)> {
        let scale = 1.0 + x[0].abs().max(x[1].abs());
        // Interpolated frames carry a residual floor of a few 1e-12, so stagnation
        // below a loose threshold counts as convergence.
        let floor = 1e-9 * scale;
        let mut last = f64::INFINITY;
        let mut best = (f64::INFINITY, s, y);
        for _ in 0..50 {
            let j = self.jet(s, y);
            let r = [x[0] - j.x[0], x[1] - j.x[1]];
            let rn = r[0].hypot(r[1]);
            if !rn.is_finite() {
                return None;
            }
            if rn < best.0 {
                best = (rn, s, y);
            }
            if rn <= 4.0 * f64::EPSILON * scale || (rn >= last && best.0 < floor) {
                return Some((self.wrap(best.1), best.2));
            }
            last = rn;
            let (gs, gy) = j.inverse();
            let (mut ds, mut dy) = (gs[0] * r[0] + gs[1] * r[1], gy[0] * r[0] + gy[1] * r[1]);
            // Keep early steps inside the region where beta is defined.
            let lim = 0.5 * self.radius;
            let big = (dy.abs() / lim).max(1.0);
            ds /= big;
            dy /= big;
            s += ds;
            y += dy;
        }
        (best.0 < floor).then(|| (self.wrap(best.1), best.2))
    }

    fn wrap(&self, s: f64) -> f64 {
        if self.is_closed() {
            s.rem_euclid(self.param_len())
        } else {
            s
        }
    }
}

pub fn jet_from_frame(f: &LocalFrame, y: f64) -> MapJet {
    let b = beta(f.kappa, f.l, y);
    let den = 1.0 - f.kappa * b;
    let b_y = 1.0 / (f.l * den);
    let b_k = 0.5 * b * b / den;
    let b_l = -y / (f.l * f.l * den);
    let b_s = b_k * f.dkappa + b_l * f.dl;
    let a = f.l * den;
    MapJet {
        x: [f.gamma[0] + b * f.eta[0], f.gamma[1] + b * f.eta[1]],
        ds: [a * f.tau[0] + b_s * f.eta[0], a * f.tau[1] + b_s * f.eta[1]],
        dy: [b_y * f.eta[0], b_y * f.eta[1]],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn circle_map(r: f64, width: f64) -> TubularMap {
        let c = Curve::from_fn(|s| [0.5 + r * (s / r).cos(), 0.5 + r * (s / r).sin()], 256, true, 2.0 * PI * r).unwrap();
        TubularMap::new(c, width).unwrap()
    }

    #[test]
    fn circle_map_is_radial() {
        let m = circle_map(0.25, 0.05);
        for &(s, y) in &[(0.1, 0.03), (1.0, -0.04), (1.5, 0.0)] {
            let p = m.eval(s, y);
            let rad = (p[0] - 0.5).hypot(p[1] - 0.5);
            // eta points inward, so the radius shrinks by beta
            assert!((rad - (0.25 - beta(4.0, 1.0, y))).abs() < 1e-11);
        }
    }

    #[test]
    fn jacobian_is_unimodular() {
        let c = Curve::from_fn(|s| [0.5 + 0.3 * s.cos(), 0.5 + 0.2 * s.sin()], 512, true, 2.0 * PI).unwrap();
        let m = TubularMap::new(c, 0.005).unwrap();
        for &(s, y) in &[(0.3, 0.004), (2.0, -0.0045), (4.0, 0.0)] {
            let j = m.jet(s, y);
            assert!((j.det() - 1.0).abs() < 1e-9, "{}", j.det());
            let h = 1e-6;
            let fd = [(m.eval(s + h, y)[0] - m.eval(s - h, y)[0]) / (2.0 * h), (m.eval(s + h, y)[1] - m.eval(s - h, y)[1]) / (2.0 * h)];
            assert!((fd[0] - j.ds[0]).abs() < 1e-7 && (fd[1] - j.ds[1]).abs() < 1e-7);
        }
    }

    #[test]
    fn inverse_round_trips() {
        let m = circle_map(0.25, 0.05);
        for &(s, y) in &[(0.2, 0.049), (1.2, -0.03), (1.5707, 0.0)] {
            let (s2, y2) = m.invert(m.eval(s, y)).unwrap();
            assert!((s2 - s).abs() < 1e-12 && (y2 - y).abs() < 1e-12);
        }
        assert!(m.invert([0.5, 0.5]).is_none());
        assert!(m.invert([0.9, 0.9]).is_none());
    }

    #[test]
    fn rejects_wide_tube() {
        let c = Curve::from_fn(|s| [0.1 * s.cos(), 0.1 * s.sin()], 64, true, 2.0 * PI).unwrap();
        assert!(TubularMap::new(c, 0.5).is_err());
    }
}
