//! Sampled plane curves, their Frenet data and normal perturbations.
//!
//! Conventions: `eta` is `tau` rotated a quarter turn counter-clockwise and
//! `kappa = (x'y'' - y'x'') / l^3`, so `d_s tau = l kappa eta` and
//! `d_s eta = -l kappa tau`. A counter-clockwise circle of radius R has
//! `kappa = 1/R` and an inward `eta`.

mod constraints;
mod perturb;

pub use constraints::{
    area_difference, kernel_part, length_after, project_area_preserving, project_equal_length, ConstraintReport,
};
pub use perturb::{flat_weight, perturb, stretch_and_curvature, c_k_norm, PerturbedGeometry};

use crate::error::{Error, Result};
use crate::numerics::fd::Diff1d;
use crate::numerics::quad::trapezoid;

/// Accuracy order of the finite differences used on curve samples.
pub const FD_ACCURACY: usize = 6;

/// A curve sampled at uniform parameter nodes on `[0, L]`.
///
/// Closed curves store `n` nodes `s_j = j L / n`; open curves store `n` nodes
/// `s_j = j L / (n - 1)` including both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    points: Vec<[f64; 2]>,
    closed: bool,
    param_len: f64,
}

/// Frenet data at every node.
#[derive(Debug, Clone)]
pub struct Frenet {
    pub speed: Vec<f64>,
    pub tau: Vec<[f64; 2]>,
    pub eta: Vec<[f64; 2]>,
    pub kappa: Vec<f64>,
}

impl Curve {
    pub fn new(points: Vec<[f64; 2]>, closed: bool, param_len: f64) -> Result<Self> {
        if points.len() < 2 * crate::numerics::fd::half_width(6, FD_ACCURACY) + 1 {
            return Err(Error::Geometry(format!("{} samples is too few", points.len())));
        }
        if !(param_len > 0.0) {
            return Err(Error::Geometry("parameter length must be positive".into()));
        }
        let c = Curve { points, closed, param_len };
        if let Some(j) = c.derivative(1).iter().position(|d| d[0].hypot(d[1]) <= 0.0) {
            return Err(Error::Geometry(format!("speed vanishes at node {j}")));
        }
        Ok(c)
    }

    /// Sample `f` on the node grid.
    pub fn from_fn<F: Fn(f64) -> [f64; 2]>(f: F, n: usize, closed: bool, param_len: f64) -> Result<Self> {
        let h = node_spacing(n, closed, param_len);
        Curve::new((0..n).map(|j| f(j as f64 * h)).collect(), closed, param_len)
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn param_len(&self) -> f64 {
        self.param_len
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        node_spacing(self.points.len(), self.closed, self.param_len)
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.len()).map(|j| j as f64 * h).collect()
    }

    /// Operator for the `order`-th derivative in `s` on this node grid.
    pub fn diff(&self, order: usize) -> Diff1d {
        Diff1d::new(self.len(), self.spacing(), order, FD_ACCURACY, self.closed)
    }

    /// Componentwise `order`-th derivative of the samples.
    pub fn derivative(&self, order: usize) -> Vec<[f64; 2]> {
        let d = self.diff(order);
        let x: Vec<f64> = self.points.iter().map(|p| p[0]).collect();
        let y: Vec<f64> = self.points.iter().map(|p| p[1]).collect();
        d.apply(&x).into_iter().zip(d.apply(&y)).map(|(a, b)| [a, b]).collect()
    }

    pub fn frenet(&self) -> Frenet {
        let d1 = self.derivative(1);
        let d2 = self.derivative(2);
        let mut f = Frenet {
            speed: Vec::with_capacity(self.len()),
            tau: Vec::with_capacity(self.len()),
            eta: Vec::with_capacity(self.len()),
            kappa: Vec::with_capacity(self.len()),
        };
        for (a, b) in d1.iter().zip(&d2) {
            let l = a[0].hypot(a[1]);
            let tau = [a[0] / l, a[1] / l];
            f.speed.push(l);
            f.tau.push(tau);
            f.eta.push([-tau[1], tau[0]]);
            f.kappa.push((a[0] * b[1] - a[1] * b[0]) / (l * l * l));
        }
        f
    }

    /// Integral of nodal values against `ds` (trapezoid; spectral for closed curves).
    pub fn integrate(&self, f: &[f64]) -> f64 {
        trapezoid(f, self.spacing(), self.closed)
    }

    /// Physical length `int l ds`.
    pub fn length(&self) -> f64 {
        self.integrate(&self.frenet().speed)
    }

    /// Mean speed; checks constant speed to `rel_tol`.
    pub fn check_constant_speed(&self, rel_tol: f64) -> Result<f64> {
        let l = self.frenet().speed;
        let mean = l.iter().sum::<f64>() / l.len() as f64;
        let dev = l.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max) / mean;
        if dev > rel_tol {
            return Err(Error::Geometry(format!("speed varies by {dev:.3e} relative")));
        }
        Ok(mean)
    }

    /// Enclosed signed area of a closed curve from `1/2 int (x y' - y x') ds`.
    pub fn signed_area(&self) -> Result<f64> {
        if !self.closed {
            return Err(Error::Geometry("signed area needs a closed curve".into()));
        }
        let d = self.derivative(1);
        let f: Vec<f64> = self.points.iter().zip(&d).map(|(p, q)| 0.5 * (p[0] * q[1] - p[1] * q[0])).collect();
        Ok(self.integrate(&f))
    }

    pub fn sup_curvature(&self) -> f64 {
        self.frenet().kappa.iter().fold(0.0, |m, k| m.max(k.abs()))
    }

    /// Default tube half-width in physical units: `min(1/(4 sup|kappa|), L_phys / 10)`.
    pub fn default_physical_radius(&self) -> f64 {
        let k = self.sup_curvature();
        let a = if k > 0.0 { 0.25 / k } else { f64::INFINITY };
        a.min(0.1 * self.length())
    }
}

pub fn node_spacing(n: usize, closed: bool, param_len: f64) -> f64 {
    if closed {
        param_len / n as f64
    } else {
        param_len / (n - 1) as f64
    }
}
