use std::f64::consts::PI;
use std::fmt::Debug;

use crate::curve::Curve;
use crate::error::Result;
use crate::numerics::quad::gauss_legendre;

/// A time-indexed family of `N` central curves, one per building block.
///
/// Every curve lives in the block square `(0, 1)^2`. Tube half-widths are in
/// the `y` variable of the tubular map.
pub trait CurveFamily: Debug + Send + Sync {
    fn name(&self) -> String;
    fn blocks(&self) -> usize;
    fn is_closed(&self) -> bool;
    fn param_len(&self) -> f64;
    fn samples(&self) -> usize;
    fn radius(&self) -> f64;
    fn curve(&self, block: usize, t: f64) -> Result<Curve>;

    /// Every block curve at time `t`.
    fn curves(&self, t: f64) -> Result<Vec<Curve>> {
        (0..self.blocks()).map(|i| self.curve(i, t)).collect()
    }
}

/// Rigid motions of one circle: rotation about its centre plus translation.
#[derive(Debug, Clone)]
pub struct CircleFamily {
    pub center: [f64; 2],
    pub radius: f64,
    pub omega: f64,
    pub drift: [f64; 2],
    pub samples: usize,
}

impl CircleFamily {
    pub fn rotating(center: [f64; 2], radius: f64, omega: f64) -> Self {
        CircleFamily { center, radius, omega, drift: [0.0, 0.0], samples: 256 }
    }

    pub fn translating(center: [f64; 2], radius: f64, drift: [f64; 2]) -> Self {
        CircleFamily { center, radius, omega: 0.0, drift, samples: 256 }
    }

    pub fn fixed(center: [f64; 2], radius: f64) -> Self {
        CircleFamily::rotating(center, radius, 0.0)
    }
}

impl CurveFamily for CircleFamily {
    fn name(&self) -> String {
        "circle".into()
    }
    fn blocks(&self) -> usize {
        1
    }
    fn is_closed(&self) -> bool {
        true
    }
    fn param_len(&self) -> f64 {
        2.0 * PI
    }
    fn samples(&self) -> usize {
        self.samples
    }
    /// `min(1/(4 kappa), L/10)` in physical units, times the speed `R`.
    fn radius(&self) -> f64 {
        self.radius * (0.25 * self.radius).min(0.2 * PI * self.radius)
    }
    fn curve(&self, _block: usize, t: f64) -> Result<Curve> {
        let c = [self.center[0] + t * self.drift[0], self.center[1] + t * self.drift[1]];
        let (r, a) = (self.radius, self.omega * t);
        Curve::from_fn(|s| [c[0] + r * (s + a).cos(), c[1] + r * (s + a).sin()], self.samples, true, 2.0 * PI)
    }
}

/// `N` congruent open "snake" curves of equal length.
///
/// Block `i` has tangent angle `theta_i + omega (t - 1/2) + sigma_i A(t) sin(2 pi s / L)`
/// with `A(t) = a0 + a1 t`, constant speed, centred at the middle of the
/// square. Blocks are rotations (and, for odd `i`, reflections) of each other.
#[derive(Debug, Clone)]
pub struct SnakeFamily {
    pub blocks: usize,
    pub length: f64,
    pub param_len: f64,
    pub a0: f64,
    pub a1: f64,
    pub omega: f64,
    pub radius_fraction: f64,
    pub samples: usize,
}

impl Default for SnakeFamily {
    fn default() -> Self {
        SnakeFamily { blocks: 6, length: 0.6, param_len: 6.0, a0: 0.09, a1: 0.06, omega: 0.6, radius_fraction: 0.25, samples: 512 }
    }
}

impl SnakeFamily {
    fn speed(&self) -> f64 {
        self.length / self.param_len
    }

    fn angle(&self, block: usize, t: f64, s: f64) -> f64 {
        let theta = PI * block as f64 / self.blocks as f64;
        let sigma = if block % 2 == 0 { 1.0 } else { -1.0 };
        theta + self.omega * (t - 0.5) + sigma * (self.a0 + self.a1 * t) * (2.0 * PI * s / self.param_len).sin()
    }

    /// Largest curvature over `t in [0, 1]`.
    pub fn sup_curvature(&self) -> f64 {
        2.0 * PI * self.a0.abs().max((self.a0 + self.a1).abs()) / self.length
    }

    /// Physical half-width: `min(1/(4 sup kappa), radius_fraction * length)`.
    pub fn physical_radius(&self) -> f64 {
        (0.25 / self.sup_curvature()).min(self.radius_fraction * self.length)
    }
}

impl CurveFamily for SnakeFamily {
    fn name(&self) -> String {
        "snake".into()
    }
    fn blocks(&self) -> usize {
        self.blocks
    }
    fn is_closed(&self) -> bool {
        false
    }
    fn param_len(&self) -> f64 {
        self.param_len
    }
    fn samples(&self) -> usize {
        self.samples
    }
    fn radius(&self) -> f64 {
        self.speed() * self.physical_radius()
    }
    fn curve(&self, block: usize, t: f64) -> Result<Curve> {
        let n = self.samples;
        let h = self.param_len / (n - 1) as f64;
        let l = self.speed();
        let (gx, gw) = gauss_legendre(8);
        let mut pts = Vec::with_capacity(n);
        let mut p = [0.0, 0.0];
        pts.push(p);
        for j in 0..n - 1 {
            let c = (j as f64 + 0.5) * h;
            let (mut dx, mut dy) = (0.0, 0.0);
            for (x, w) in gx.iter().zip(&gw) {
                let a = self.angle(block, t, c + 0.5 * h * x);
                dx += w * a.cos();
                dy += w * a.sin();
            }
            p = [p[0] + 0.5 * h * l * dx, p[1] + 0.5 * h * l * dy];
            pts.push(p);
        }
        // Centre the arc-length centroid at the middle of the square.
        let mut w: Vec<f64> = vec![1.0; n];
        w[0] = 0.5;
        w[n - 1] = 0.5;
        let tot: f64 = w.iter().sum();
        let cx = pts.iter().zip(&w).map(|(q, wi)| q[0] * wi).sum::<f64>() / tot;
        let cy = pts.iter().zip(&w).map(|(q, wi)| q[1] * wi).sum::<f64>() / tot;
        let pts = pts.into_iter().map(|q| [q[0] - cx + 0.5, q[1] - cy + 0.5]).collect();
        Curve::new(pts, false, self.param_len)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snake_has_constant_speed_and_equal_lengths() {
        let f = SnakeFamily::default();
        let l0 = f.curve(0, 0.0).unwrap().length();
        for i in 0..f.blocks {
            for &t in &[0.0, 0.5, 1.0] {
                let c = f.curve(i, t).unwrap();
                assert!((c.check_constant_speed(1e-6).unwrap() - 0.1).abs() < 1e-9);
                assert!((c.length() - l0).abs() < 1e-12);
                assert!(c.sup_curvature() <= f.sup_curvature() * (1.0 + 1e-6));
            }
        }
        assert!((l0 - 0.6).abs() < 1e-12);
    }

    #[test]
    fn snake_stays_inside_the_square() {
        let f = SnakeFamily::default();
        let r = f.physical_radius();
        for i in 0..f.blocks {
            for k in 0..=10 {
                let c = f.curve(i, k as f64 / 10.0).unwrap();
                for p in c.points() {
                    assert!(p[0] - r > 0.02 && p[0] + r < 0.98 && p[1] - r > 0.02 && p[1] + r < 0.98);
                }
            }
        }
    }

    #[test]
    fn circle_family_moves_rigidly() {
        let f = CircleFamily::translating([0.4, 0.5], 0.2, [0.1, 0.0]);
        let a = f.curve(0, 0.0).unwrap();
        let b = f.curve(0, 1.0).unwrap();
        for (p, q) in a.points().iter().zip(b.points()) {
            assert!((q[0] - p[0] - 0.1).abs() < 1e-15 && (q[1] - p[1]).abs() < 1e-15);
        }
    }
}
