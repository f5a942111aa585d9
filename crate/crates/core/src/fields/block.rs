use rayon::prelude::*;

use super::profile::CutoffProfile;
use crate::area_map::{beta, jet_from_frame, LocalFrame, TubularMap};
use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::grid::GridField;
use crate::numerics::bump::Plateau;
use crate::numerics::fd::LocalInterp;
use crate::numerics::quad::{gauss_legendre, trapezoid};

/// One building block frozen at time `t`: tube maps at `t` and `t +- dt`,
/// and what is needed to evaluate `Theta` and `V` anywhere in the block square.
///
/// `V` is the skew gradient of `w psi`, where `psi` is the stream function of
/// `d_t Phi o Psi` in tube coordinates and `w` the velocity cutoff. It equals
/// `d_t Phi o Psi` wherever `w = 1`, which contains the support of `Theta`,
/// and is exactly divergence free and smooth across the tube edge.
#[derive(Debug, Clone)]
pub struct BlockFrame {
    pub t: f64,
    map: TubularMap,
    map_p: TubularMap,
    map_m: TubularMap,
    psi0: Vec<f64>,
    rate: Vec<[f64; 2]>,
    psi_interp: LocalInterp,
    profile: CutoffProfile,
    amp: f64,
    dt: f64,
    quad: (Vec<f64>, Vec<f64>),
}

/// A frame together with its time derivatives.
struct FrameRate {
    frame: LocalFrame,
    gamma_t: [f64; 2],
    eta_t: [f64; 2],
    l_t: f64,
    kappa_t: f64,
}

impl FrameRate {
    /// `d_t Phi(s, y)` for the frame's `s`.
    fn at(&self, y: f64) -> [f64; 2] {
        let f = &self.frame;
        let b = beta(f.kappa, f.l, y);
        let den = 1.0 - f.kappa * b;
        let b_t = 0.5 * b * b / den * self.kappa_t - y / (f.l * f.l * den) * self.l_t;
        [
            self.gamma_t[0] + b_t * f.eta[0] + b * self.eta_t[0],
            self.gamma_t[1] + b_t * f.eta[1] + b * self.eta_t[1],
        ]
    }
}

impl BlockFrame {
    pub fn new(curves: [Curve; 3], t: f64, dt: f64, radius: f64, profile: CutoffProfile) -> Result<Self> {
        let [cm, c, cp] = curves;
        let closed = c.is_closed();
        let n = c.len();
        let h = c.spacing();
        // Flux through the centre line: d_s psi = det(gamma', d_t gamma).
        let d1 = c.derivative(1);
        let flux: Vec<f64> = (0..n)
            .map(|j| {
                let v = [(cp.points()[j][0] - cm.points()[j][0]) / (2.0 * dt), (cp.points()[j][1] - cm.points()[j][1]) / (2.0 * dt)];
                d1[j][0] * v[1] - d1[j][1] * v[0]
            })
            .collect();
        let fi = LocalInterp::new(n, h, 0.0, closed, 10);
        let (gx, gw) = gauss_legendre(6);
        let intervals = if closed { n } else { n - 1 };
        let mut psi = vec![0.0; intervals + 1];
        let mut buf = [[0.0; 2]; 1];
        for j in 0..intervals {
            let mut acc = 0.0;
            for (x, w) in gx.iter().zip(&gw) {
                fi.eval_into((j as f64 + 0.5 + 0.5 * x) * h, 0, |i| [flux[i], 0.0], &mut buf);
                acc += w * buf[0][0];
            }
            psi[j + 1] = psi[j] + 0.5 * h * acc;
        }
        if closed {
            let defect = psi[n];
            let speed = (0..n).map(|j| (cp.points()[j][0] - cm.points()[j][0]).hypot(cp.points()[j][1] - cm.points()[j][1]) / (2.0 * dt));
            let scale = c.length() * c.length() * speed.fold(1e-300f64, f64::max);
            if defect.abs() > 1e-6 * scale {
                return Err(Error::Fields(format!("closed curve has net flux {defect:.3e}; its area is not conserved")));
            }
            for (j, p) in psi.iter_mut().enumerate() {
                *p -= defect * j as f64 / n as f64;
            }
            psi.pop();
        }
        // The constant is free; centring it keeps psi * grad(w) small in the cutoff
        // band. The mean, unlike the midrange, is smooth in time.
        let mid = trapezoid(&psi, 1.0, closed) / if closed { psi.len() as f64 } else { (psi.len() - 1) as f64 };
        psi.iter_mut().for_each(|p| *p -= mid);
        // Nodal velocity of the centre line; interpolating it (rather than
        // differencing two interpolated maps) keeps V free of 1/dt noise.
        let rate: Vec<[f64; 2]> = (0..n)
            .map(|j| {
                let (a, b) = (cp.points()[j], cm.points()[j]);
                [(a[0] - b[0]) / (2.0 * dt), (a[1] - b[1]) / (2.0 * dt)]
            })
            .collect();
        let psi_interp = LocalInterp::new(psi.len(), h, 0.0, closed, 10);
        let amp = 1.0 / (radius * profile.scalar_s_l2(c.param_len())).sqrt();
        Ok(BlockFrame {
            t,
            map: TubularMap::new(c, radius)?,
            map_p: TubularMap::new(cp, radius)?,
            map_m: TubularMap::new(cm, radius)?,
            psi0: psi,
            rate,
            psi_interp,
            profile,
            amp,
            dt,
            quad: gauss_legendre(12),
        })
    }

    pub fn map(&self) -> &TubularMap {
        &self.map
    }

    fn s_coordinate(&self, s: f64) -> f64 {
        (s - 0.5 * self.map.param_len()) / self.map.param_len()
    }

    fn scalar_from_coords(&self, s: f64, y: f64) -> f64 {
        let taper = self.profile.scalar_s.map_or(1.0, |p: Plateau| p.value(self.s_coordinate(s)));
        self.amp * self.profile.theta_bar(y / self.map.radius()) * taper
    }

    /// `Theta(x)` at this time; `offset` of `+1` or `-1` evaluates at `t +- dt`.
    pub fn theta_at(&self, x: [f64; 2], offset: i32) -> f64 {
        let m = match offset {
            0 => &self.map,
            1 => &self.map_p,
            _ => &self.map_m,
        };
        match m.invert(x) {
            Some((s, y)) => self.scalar_from_coords(s, y),
            None => 0.0,
        }
    }

    /// `(Theta, V)` at `x`.
    pub fn fields_at(&self, x: [f64; 2]) -> (f64, [f64; 2]) {
        match self.map.invert(x) {
            Some((s, y)) => (self.scalar_from_coords(s, y), self.velocity_from_coords(s, y)),
            None => (0.0, [0.0, 0.0]),
        }
    }

    /// Step of the centred time differences.
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn velocity_at(&self, x: [f64; 2]) -> [f64; 2] {
        self.fields_at(x).1
    }

    /// The raw tube velocity `d_t Phi(s, y)`, without cutoff.
    pub fn tube_velocity(&self, s: f64, y: f64) -> [f64; 2] {
        self.rates(s).at(y)
    }

    /// Time derivatives of the frame at `s`, linearised about the current map.
    fn rates(&self, s: f64) -> FrameRate {
        let f = self.map.frame(s);
        let mut g = [[0.0; 2]; 3];
        self.map.interp().eval_into(s, 2, |i| self.map.curve().points()[i], &mut g);
        let mut r = [[0.0; 2]; 3];
        self.psi_interp.eval_into(s, 2, |i| self.rate[i], &mut r);
        let cross = |a: [f64; 2], b: [f64; 2]| a[0] * b[1] - a[1] * b[0];
        let dot = |a: [f64; 2], b: [f64; 2]| a[0] * b[0] + a[1] * b[1];
        let l_t = dot(f.tau, r[1]);
        let tau_t = [(r[1][0] - f.tau[0] * l_t) / f.l, (r[1][1] - f.tau[1] * l_t) / f.l];
        let kappa_t = (cross(r[1], g[2]) + cross(g[1], r[2])) / f.l.powi(3) - 3.0 * f.kappa * l_t / f.l;
        FrameRate { frame: f, gamma_t: r[0], eta_t: [-tau_t[1], tau_t[0]], l_t, kappa_t }
    }

    /// `V` at tube coordinates `(s, y)`.
    pub fn velocity_from_coords(&self, s: f64, y: f64) -> [f64; 2] {
        let r = self.map.radius();
        let z = y / r;
        let u = self.s_coordinate(s);
        let wy = self.profile.velocity_y.value(z);
        let ws = self.profile.velocity_s.map_or(1.0, |p| p.value(u));
        let w = wy * ws;
        if w == 0.0 {
            return [0.0, 0.0];
        }
        let rt = self.rates(s);
        let fr = &rt.frame;
        let vt = |yy: f64| rt.at(yy);
        let v0 = vt(y);
        let dwy = self.profile.velocity_y.derivative(z) / r * ws;
        let dws = self.profile.velocity_s.map_or(0.0, |p| p.derivative(u)) / self.map.param_len() * wy;
        if dwy == 0.0 && dws == 0.0 {
            return [w * v0[0], w * v0[1]];
        }
        // psi(s, y) = psi0(s) + int_0^y det(d_y Phi, d_t Phi) dy'
        let mut buf = [[0.0; 2]; 1];
        self.psi_interp.eval_into(s, 0, |i| [self.psi0[i], 0.0], &mut buf);
        let mut psi = buf[0][0];
        let (gx, gw) = &self.quad;
        let mut acc = 0.0;
        for (q, wq) in gx.iter().zip(gw) {
            let yy = 0.5 * y * (1.0 + q);
            let j = jet_from_frame(fr, yy);
            let v = vt(yy);
            acc += wq * (j.dy[0] * v[1] - j.dy[1] * v[0]);
        }
        psi += 0.5 * y * acc;
        let (gs, gyr) = jet_from_frame(fr, y).inverse();
        let gw_ = [dws * gs[0] + dwy * gyr[0], dws * gs[1] + dwy * gyr[1]];
        [w * v0[0] - psi * gw_[1], w * v0[1] + psi * gw_[0]]
    }

    /// `Theta` and `V` at the `k x k` cell centres of the block square.
    pub fn sample_grid(&self, k: usize) -> (GridField, GridField) {
        let h = 1.0 / k as f64;
        let rows: Vec<Vec<(f64, [f64; 2])>> = (0..k)
            .into_par_iter()
            .map(|j| (0..k).map(|i| self.fields_at([(i as f64 + 0.5) * h, (j as f64 + 0.5) * h])).collect())
            .collect();
        let mut theta = GridField::zeros(k, 1);
        let mut vel = GridField::zeros(k, 2);
        let n2 = k * k;
        for (j, row) in rows.into_iter().enumerate() {
            for (i, (th, v)) in row.into_iter().enumerate() {
                theta.data_mut()[j * k + i] = th;
                vel.data_mut()[j * k + i] = v[0];
                vel.data_mut()[n2 + j * k + i] = v[1];
            }
        }
        (theta, vel)
    }

    /// `Theta` alone on the `k x k` block grid, at `t + offset dt`.
    pub fn sample_theta(&self, k: usize, offset: i32) -> GridField {
        let h = 1.0 / k as f64;
        let data: Vec<f64> = (0..k)
            .into_par_iter()
            .flat_map_iter(|j| (0..k).map(move |i| self.theta_at([(i as f64 + 0.5) * h, (j as f64 + 0.5) * h], offset)))
            .collect();
        GridField::from_data(k, 1, data).expect("grid size")
    }
}
