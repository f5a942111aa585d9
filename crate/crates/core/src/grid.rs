//! Cell-centred fields on a uniform grid over the unit square / torus.

use crate::error::{Error, Result};
use crate::numerics::fd::{diff_axis, Diff1d};

/// Values at cell centres `x = ((i + 1/2) / res, (j + 1/2) / res)`.
///
/// Storage is component-major: component `c` occupies one row-major plane
/// `data[c * res^2 + j * res + i]`, with `i` along `x_1`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    res: usize,
    comps: usize,
    data: Vec<f64>,
}

impl GridField {
    pub fn zeros(res: usize, comps: usize) -> Self {
        GridField { res, comps, data: vec![0.0; res * res * comps] }
    }

    pub fn from_data(res: usize, comps: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != res * res * comps || comps == 0 || comps > 3 {
            return Err(Error::Contract(format!("{} values do not fit a {comps}-component {res}^2 grid", data.len())));
        }
        Ok(GridField { res, comps, data })
    }

    /// Scalar field from a function of the cell centre.
    pub fn from_fn<F: Fn([f64; 2]) -> f64>(res: usize, f: F) -> Self {
        let mut g = GridField::zeros(res, 1);
        let h = 1.0 / res as f64;
        for j in 0..res {
            for i in 0..res {
                g.data[j * res + i] = f([(i as f64 + 0.5) * h, (j as f64 + 0.5) * h]);
            }
        }
        g
    }

    /// Vector field from a function of the cell centre.
    pub fn vector_from_fn<F: Fn([f64; 2]) -> [f64; 2]>(res: usize, f: F) -> Self {
        let mut g = GridField::zeros(res, 2);
        let h = 1.0 / res as f64;
        let n2 = res * res;
        for j in 0..res {
            for i in 0..res {
                let v = f([(i as f64 + 0.5) * h, (j as f64 + 0.5) * h]);
                g.data[j * res + i] = v[0];
                g.data[n2 + j * res + i] = v[1];
            }
        }
        g
    }

    pub fn res(&self) -> usize {
        self.res
    }

    pub fn comps(&self) -> usize {
        self.comps
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn comp(&self, c: usize) -> &[f64] {
        let n2 = self.res * self.res;
        &self.data[c * n2..(c + 1) * n2]
    }

    pub fn comp_mut(&mut self, c: usize) -> &mut [f64] {
        let n2 = self.res * self.res;
        &mut self.data[c * n2..(c + 1) * n2]
    }

    /// Pointwise Euclidean magnitude, maximised over the grid.
    pub fn sup_norm(&self) -> f64 {
        let n2 = self.res * self.res;
        (0..n2)
            .map(|k| (0..self.comps).map(|c| self.data[c * n2 + k].powi(2)).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    /// Midpoint-rule integral of each component.
    pub fn integral(&self, c: usize) -> f64 {
        self.comp(c).iter().sum::<f64>() / (self.res * self.res) as f64
    }

    /// `int |f|^2`, summed over components.
    pub fn l2_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>() / (self.res * self.res) as f64
    }

    pub fn scaled(&self, a: f64) -> GridField {
        GridField { res: self.res, comps: self.comps, data: self.data.iter().map(|v| a * v).collect() }
    }

    pub fn l2_distance(&self, other: &GridField) -> f64 {
        assert_eq!((self.res, self.comps), (other.res, other.comps));
        (self.data.iter().zip(&other.data).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / (self.res * self.res) as f64).sqrt()
    }

    /// Periodic bilinear interpolation at a point of the torus.
    pub fn sample(&self, c: usize, x: [f64; 2]) -> f64 {
        let n = self.res;
        let u = x[0] * n as f64 - 0.5;
        let v = x[1] * n as f64 - 0.5;
        let (i0, j0) = (u.floor(), v.floor());
        let (fu, fv) = (u - i0, v - j0);
        let wrap = |k: f64| (k as isize).rem_euclid(n as isize) as usize;
        let (i0, i1, j0, j1) = (wrap(i0), wrap(i0 + 1.0), wrap(j0), wrap(j0 + 1.0));
        let p = self.comp(c);
        (1.0 - fu) * (1.0 - fv) * p[j0 * n + i0] + fu * (1.0 - fv) * p[j0 * n + i1] + (1.0 - fu) * fv * p[j1 * n + i0] + fu * fv * p[j1 * n + i1]
    }

    /// Bilinear resampling onto another cell-centred grid.
    pub fn resample(&self, res: usize) -> GridField {
        let mut out = GridField::zeros(res, self.comps);
        let h = 1.0 / res as f64;
        for c in 0..self.comps {
            let plane = out.comp_mut(c);
            for j in 0..res {
                for i in 0..res {
                    plane[j * res + i] = self.sample(c, [(i as f64 + 0.5) * h, (j as f64 + 0.5) * h]);
                }
            }
        }
        out
    }

    /// Sixth-order periodic finite-difference gradient of one component.
    pub fn gradient(&self, c: usize) -> [Vec<f64>; 2] {
        let op = Diff1d::new(self.res, 1.0 / self.res as f64, 1, 6, true);
        let p = self.comp(c);
        [diff_axis(p, self.res, self.res, 0, &op), diff_axis(p, self.res, self.res, 1, &op)]
    }

    /// Sixth-order periodic finite-difference Laplacian of one component.
    pub fn laplacian(&self, c: usize) -> Vec<f64> {
        let op = Diff1d::new(self.res, 1.0 / self.res as f64, 2, 6, true);
        let p = self.comp(c);
        let xx = diff_axis(p, self.res, self.res, 0, &op);
        let yy = diff_axis(p, self.res, self.res, 1, &op);
        xx.iter().zip(&yy).map(|(a, b)| a + b).collect()
    }

    /// Finite-difference divergence of a vector field.
    pub fn divergence(&self) -> Vec<f64> {
        assert_eq!(self.comps, 2);
        let gx = self.gradient(0)[0].clone();
        let gy = &self.gradient(1)[1];
        gx.iter().zip(gy).map(|(a, b)| a + b).collect()
    }

    /// Discrete `C^1` norm: sup of the values plus sup of the gradient entries.
    pub fn c1_norm(&self) -> f64 {
        let mut c0 = 0.0f64;
        let mut c1 = 0.0f64;
        for c in 0..self.comps {
            c0 = c0.max(self.comp(c).iter().fold(0.0, |m, v| m.max(v.abs())));
            for g in self.gradient(c) {
                c1 = c1.max(g.iter().fold(0.0, |m, v| m.max(v.abs())));
            }
        }
        c0 + c1
    }

    /// Pointwise difference `self - other`.
    pub fn minus(&self, other: &GridField) -> GridField {
        assert_eq!((self.res, self.comps), (other.res, other.comps));
        GridField { res: self.res, comps: self.comps, data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect() }
    }

    /// Cells where any component exceeds `tol` in magnitude.
    pub fn support_mask(&self, tol: f64) -> Vec<bool> {
        let n2 = self.res * self.res;
        (0..n2).map(|k| (0..self.comps).any(|c| self.data[c * n2 + k].abs() > tol)).collect()
    }

    /// Bounding box `[x_lo, x_hi, y_lo, y_hi]` of the cells where the field exceeds `tol`.
    pub fn support_box(&self, tol: f64) -> Option<[f64; 4]> {
        let h = 1.0 / self.res as f64;
        let mut b = [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY];
        for (k, _) in self.support_mask(tol).iter().enumerate().filter(|(_, &m)| m) {
            let (x, y) = ((k % self.res) as f64 * h, (k / self.res) as f64 * h);
            b = [b[0].min(x), b[1].max(x + h), b[2].min(y), b[3].max(y + h)];
        }
        b[0].is_finite().then_some(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrals_of_trigonometric_fields() {
        let g = GridField::from_fn(64, |x| (2.0 * std::f64::consts::PI * x[0]).sin());
        assert!(g.integral(0).abs() < 1e-15);
        assert!((g.l2_sq() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn resampling_preserves_linear_data_in_the_interior() {
        let g = GridField::from_fn(20, |x| x[0] + 2.0 * x[1]);
        let r = g.resample(40);
        let h = 1.0 / 40.0;
        let (i, j) = (15, 22);
        let exact = (i as f64 + 0.5) * h + 2.0 * (j as f64 + 0.5) * h;
        assert!((r.comp(0)[j * 40 + i] - exact).abs() < 1e-14);
    }
}
