//! Finite differences on uniform grids and local polynomial interpolation.
//!
//! Everything here is built on Fornberg's recursion for the weights of an
//! arbitrary stencil, so the same routine serves differentiation of sampled
//! curves and continuous evaluation between samples.

/// Weights `c[k][j]` such that `f^(k)(x0) ~ sum_j c[k][j] f(nodes[j])` for `k <= m`.
pub fn fornberg(x0: f64, nodes: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut flat = vec![0.0; (m + 1) * n];
    fornberg_into(x0, nodes, m, &mut flat);
    flat.chunks(n).map(|c| c.to_vec()).collect()
}

/// Allocation-free form of [`fornberg`]; `c` is row-major `(m + 1) x nodes.len()`.
pub fn fornberg_into(x0: f64, nodes: &[f64], m: usize, c: &mut [f64]) {
    let n = nodes.len();
    c.iter_mut().for_each(|v| *v = 0.0);
    c[0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k * n + i] = c1 * (k as f64 * c[(k - 1) * n + i - 1] - c5 * c[k * n + i - 1]) / c2;
                }
                c[i] = -c1 * c5 * c[i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k * n + j] = (c4 * c[k * n + j] - k as f64 * c[(k - 1) * n + j]) / c3;
            }
            c[j] = c4 * c[j] / c3;
        }
        c1 = c2;
    }
}

/// Half-width of the centred stencil giving `accuracy` for derivative `order`.
pub fn half_width(order: usize, accuracy: usize) -> usize {
    (order + accuracy - 1) / 2
}

/// A derivative operator on `n` uniform samples with spacing `h`.
///
/// Periodic grids use one centred stencil everywhere. Bounded grids shift the
/// window inward near the ends so every row keeps the same number of points.
#[derive(Debug, Clone)]
pub struct Diff1d {
    n: usize,
    periodic: bool,
    width: usize,
    /// Row weights; periodic grids store a single row.
    rows: Vec<(isize, Vec<f64>)>,
}

impl Diff1d {
    pub fn new(n: usize, h: f64, order: usize, accuracy: usize, periodic: bool) -> Self {
        let p = half_width(order, accuracy);
        let width = 2 * p + 1;
        assert!(n >= width, "grid of {n} points too short for a {width}-point stencil");
        let scale = h.powi(order as i32);
        let weights_at = |offset: isize| -> Vec<f64> {
            let nodes: Vec<f64> = (0..width).map(|j| (j as isize + offset) as f64).collect();
            fornberg(0.0, &nodes, order)[order].iter().map(|w| w / scale).collect()
        };
        let rows = if periodic {
            vec![(-(p as isize), weights_at(-(p as isize)))]
        } else {
            (0..n)
                .map(|i| {
                    let start = (i as isize - p as isize).clamp(0, (n - width) as isize);
                    let off = start - i as isize;
                    (off, weights_at(off))
                })
                .collect()
        };
        Diff1d { n, periodic, width, rows }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Derivative at index `i` of data laid out with the given stride.
    #[inline]
    pub fn at_strided(&self, f: &[f64], offset: usize, stride: usize, i: usize) -> f64 {
        let (off, w) = if self.periodic { &self.rows[0] } else { &self.rows[i] };
        let n = self.n as isize;
        let mut acc = 0.0;
        for (j, wj) in w.iter().enumerate() {
            let mut idx = i as isize + off + j as isize;
            if self.periodic {
                idx = idx.rem_euclid(n);
            }
            acc += wj * f[offset + idx as usize * stride];
        }
        acc
    }

    #[inline]
    pub fn at(&self, f: &[f64], i: usize) -> f64 {
        self.at_strided(f, 0, 1, i)
    }

    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        assert_eq!(f.len(), self.n);
        (0..self.n).map(|i| self.at(f, i)).collect()
    }

    pub fn stencil_width(&self) -> usize {
        self.width
    }
}

/// Derivative along one axis of a row-major `ny x nx` array (`axis` 0 is x).
pub fn diff_axis(f: &[f64], nx: usize, ny: usize, axis: usize, op: &Diff1d) -> Vec<f64> {
    let mut out = vec![0.0; f.len()];
    if axis == 0 {
        assert_eq!(op.len(), nx);
        for j in 0..ny {
            for i in 0..nx {
                out[j * nx + i] = op.at_strided(f, j * nx, 1, i);
            }
        }
    } else {
        assert_eq!(op.len(), ny);
        for j in 0..ny {
            for i in 0..nx {
                out[j * nx + i] = op.at_strided(f, i, nx, j);
            }
        }
    }
    out
}

/// Local Lagrange interpolation of uniformly spaced samples.
///
/// Samples sit at `x_j = x_start + j h`. Periodic data wraps around; bounded
/// data uses a window clamped to the sample range.
#[derive(Debug, Clone)]
pub struct LocalInterp {
    n: usize,
    h: f64,
    x_start: f64,
    periodic: bool,
    points: usize,
}

impl LocalInterp {
    pub fn new(n: usize, h: f64, x_start: f64, periodic: bool, points: usize) -> Self {
        assert!(n >= points);
        LocalInterp { n, h, x_start, periodic, points }
    }

    pub fn points(&self) -> usize {
        self.points
    }

    /// Interpolate derivatives `0..=m` of `f` at `x` into `out` without allocating.
    ///
    /// `f(i)` returns sample `i`; `out` needs `m + 1` slots. At most 16 points
    /// and derivative order 3 are supported on this path.
    pub fn eval_into<F: Fn(usize) -> [f64; 2]>(&self, x: f64, m: usize, f: F, out: &mut [[f64; 2]]) {
        const P: usize = 16;
        debug_assert!(self.points <= P && m <= 3);
        let u = (x - self.x_start) / self.h;
        let half = self.points as isize / 2;
        let mut start = u.floor() as isize - half + 1;
        if !self.periodic {
            start = start.clamp(0, (self.n - self.points) as isize);
        }
        let mut nodes = [0.0; P];
        for (j, v) in nodes.iter_mut().take(self.points).enumerate() {
            *v = (start + j as isize) as f64;
        }
        let mut w = [0.0; P * 4];
        let np = self.points;
        fornberg_into(u, &nodes[..np], m, &mut w[..(m + 1) * np]);
        for o in out.iter_mut().take(m + 1) {
            *o = [0.0, 0.0];
        }
        // Derivative weights sum to zero, so they act on offsets from the first
        // sample; this avoids cancellation when the data sit far from zero.
        let mut base = [0.0; 2];
        for j in 0..np {
            let idx = (start + j as isize).rem_euclid(self.n as isize) as usize;
            let v = f(idx);
            if j == 0 {
                base = v;
            }
            out[0][0] += w[j] * v[0];
            out[0][1] += w[j] * v[1];
            let d = [v[0] - base[0], v[1] - base[1]];
            for (k, o) in out.iter_mut().take(m + 1).enumerate().skip(1) {
                let c = w[k * np + j];
                o[0] += c * d[0];
                o[1] += c * d[1];
            }
        }
        let mut scale = 1.0;
        for o in out.iter_mut().take(m + 1).skip(1) {
            scale *= self.h;
            o[0] /= scale;
            o[1] /= scale;
        }
    }

    /// Index window and Fornberg weights for derivatives up to `m` at `x`.
    pub fn weights(&self, x: f64, m: usize) -> (Vec<usize>, Vec<Vec<f64>>) {
        let u = (x - self.x_start) / self.h;
        let half = self.points as isize / 2;
        let base = u.floor() as isize;
        let mut start = base - half + 1;
        if !self.periodic {
            start = start.clamp(0, (self.n - self.points) as isize);
        }
        let nodes: Vec<f64> = (0..self.points).map(|j| (start + j as isize) as f64).collect();
        let mut w = fornberg(u, &nodes, m);
        for (k, row) in w.iter_mut().enumerate() {
            let s = self.h.powi(k as i32);
            row.iter_mut().for_each(|v| *v /= s);
        }
        let idx = (0..self.points)
            .map(|j| (start + j as isize).rem_euclid(self.n as isize) as usize)
            .collect();
        (idx, w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fornberg_reproduces_classic_weights() {
        let w = fornberg(0.0, &[-1.0, 0.0, 1.0], 2);
        assert!((w[1][0] + 0.5).abs() < 1e-15 && (w[1][2] - 0.5).abs() < 1e-15);
        assert!((w[2][0] - 1.0).abs() < 1e-15 && (w[2][1] + 2.0).abs() < 1e-15);
    }

    #[test]
    fn periodic_sixth_order_on_sine() {
        for &n in &[32usize, 64] {
            let h = 1.0 / n as f64;
            let f: Vec<f64> = (0..n).map(|i| (2.0 * std::f64::consts::PI * i as f64 * h).sin()).collect();
            let d = Diff1d::new(n, h, 1, 6, true).apply(&f);
            let err = (0..n)
                .map(|i| (d[i] - 2.0 * std::f64::consts::PI * (2.0 * std::f64::consts::PI * i as f64 * h).cos()).abs())
                .fold(0.0, f64::max);
            assert!(err < 2e-4 * (32.0 / n as f64).powi(6), "n={n} err={err}");
        }
    }

    #[test]
    fn bounded_stencil_is_exact_on_polynomials() {
        let n = 20;
        let h = 0.1;
        let f: Vec<f64> = (0..n).map(|i| (i as f64 * h).powi(5)).collect();
        let d = Diff1d::new(n, h, 2, 6, false).apply(&f);
        for (i, di) in d.iter().enumerate() {
            let x = i as f64 * h;
            assert!((di - 20.0 * x.powi(3)).abs() < 1e-8);
        }
    }

    #[test]
    fn interpolation_hits_polynomial() {
        let it = LocalInterp::new(30, 0.5, 1.0, false, 8);
        let f: Vec<f64> = (0..30).map(|j| { let x = 1.0 + 0.5 * j as f64; x * x * x - x }).collect();
        let (idx, w) = it.weights(3.37, 1);
        let v: f64 = idx.iter().zip(&w[0]).map(|(&i, c)| c * f[i]).sum();
        let dv: f64 = idx.iter().zip(&w[1]).map(|(&i, c)| c * f[i]).sum();
        assert!((v - (3.37f64.powi(3) - 3.37)).abs() < 1e-11);
        assert!((dv - (3.0 * 3.37 * 3.37 - 1.0)).abs() < 1e-10);
    }
}
