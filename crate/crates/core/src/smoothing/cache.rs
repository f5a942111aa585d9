use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::GridField;
use crate::qss::{BlockSamples, BlockSource};

/// Block fields sampled at Chebyshev-Lobatto block times and interpolated in between.
///
/// Evaluating the blocks from the curves costs seconds per call at solver
/// resolution, while the blocks are smooth in the block time; the solver
/// samples the velocity a few thousand times, so it reads from here.
#[derive(Debug, Clone)]
pub struct BlockCache {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    samples: Vec<BlockSamples>,
}

/// `(1 - cos(pi j / (n-1))) / 2`, `j = 0..n`.
pub fn lobatto_nodes(n: usize) -> Vec<f64> {
    (0..n).map(|j| 0.5 * (1.0 - (PI * j as f64 / (n - 1) as f64).cos())).collect()
}

impl BlockCache {
    pub fn build(source: &dyn BlockSource, k: usize, nodes: usize) -> Result<Self> {
        if nodes < 2 {
            return Err(Error::Config(format!("need at least 2 interpolation nodes, got {nodes}")));
        }
        let taus = lobatto_nodes(nodes);
        let samples = taus.iter().map(|&t| source.sample(k, t)).collect::<Result<Vec<_>>>()?;
        Ok(Self::from_samples(taus, samples))
    }

    fn from_samples(nodes: Vec<f64>, samples: Vec<BlockSamples>) -> Self {
        let n = nodes.len();
        let weights = (0..n)
            .map(|j| {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                if j == 0 || j == n - 1 {
                    0.5 * s
                } else {
                    s
                }
            })
            .collect();
        BlockCache { nodes, weights, samples }
    }

    pub fn k(&self) -> usize {
        self.samples[0].k
    }

    pub fn blocks(&self) -> usize {
        self.samples[0].blocks()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Same nodes with every block averaged over `ratio x ratio` cells.
    pub fn coarsen(&self, ratio: usize) -> Result<Self> {
        let samples = self.samples.iter().map(|s| s.coarsen(ratio)).collect::<Result<Vec<_>>>()?;
        Ok(Self::from_samples(self.nodes.clone(), samples))
    }

    /// Largest block speed over the nodes.
    pub fn velocity_sup(&self) -> f64 {
        self.samples.iter().flat_map(|s| s.vel.iter().map(|g| g.sup_norm())).fold(0.0, f64::max)
    }

    /// The samples at the nodes.
    pub fn samples(&self) -> &[BlockSamples] {
        &self.samples
    }

    /// Barycentric weights for `tau`; exact node hits return a unit vector.
    pub fn coefficients(&self, tau: f64) -> Vec<f64> {
        let tau = tau.clamp(0.0, 1.0);
        if let Some(j) = self.nodes.iter().position(|&x| x == tau) {
            let mut c = vec![0.0; self.nodes.len()];
            c[j] = 1.0;
            return c;
        }
        let raw: Vec<f64> = self.nodes.iter().zip(&self.weights).map(|(x, w)| w / (tau - x)).collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|r| r / total).collect()
    }

    fn combine(&self, c: &[f64], pick: impl Fn(&BlockSamples) -> &Vec<GridField>) -> Vec<GridField> {
        let first = pick(&self.samples[0]);
        (0..first.len())
            .map(|b| {
                let (res, comps) = (first[b].res(), first[b].comps());
                let mut data = vec![0.0; res * res * comps];
                for (s, &w) in self.samples.iter().zip(c) {
                    if w == 0.0 {
                        continue;
                    }
                    data.par_iter_mut().zip(pick(s)[b].data().par_iter()).for_each(|(o, v)| *o += w * v);
                }
                GridField::from_data(res, comps, data).expect("grid size")
            })
            .collect()
    }

    /// Interpolated velocity blocks at `tau`.
    pub fn velocity(&self, tau: f64) -> Vec<GridField> {
        self.combine(&self.coefficients(tau), |s| &s.vel)
    }

    /// Interpolated scalar blocks at `tau`.
    pub fn scalar(&self, tau: f64) -> Vec<GridField> {
        self.combine(&self.coefficients(tau), |s| &s.theta)
    }

    pub fn at(&self, tau: f64) -> BlockSamples {
        let c = self.coefficients(tau);
        BlockSamples { k: self.k(), tau, theta: self.combine(&c, |s| &s.theta), vel: self.combine(&c, |s| &s.vel) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridField;

    /// Blocks whose values are a cubic in the block time.
    struct Cubic;

    impl BlockSource for Cubic {
        fn blocks(&self) -> usize {
            2
        }

        fn sample(&self, k: usize, tau: f64) -> Result<BlockSamples> {
            let p = tau * tau * tau - 0.5 * tau;
            let theta = (0..2).map(|i| GridField::from_fn(k, |x| p * (x[0] + i as f64))).collect();
            let vel = (0..2).map(|_| GridField::vector_from_fn(k, |x| [p * x[1], -p])).collect();
            Ok(BlockSamples { k, tau, theta, vel })
        }
    }

    #[test]
    fn polynomials_are_reproduced() {
        let c = BlockCache::build(&Cubic, 8, 5).unwrap();
        for tau in [0.0, 0.13, 0.5, 0.77, 1.0] {
            let got = c.at(tau);
            let want = Cubic.sample(8, tau).unwrap();
            for (a, b) in got.theta.iter().chain(&got.vel).zip(want.theta.iter().chain(&want.vel)) {
                assert!(a.l2_distance(b) < 1e-14);
            }
        }
    }

    #[test]
    fn coarsening_keeps_nodes() {
        let c = BlockCache::build(&Cubic, 10, 4).unwrap();
        let d = c.coarsen(5).unwrap();
        assert_eq!(d.k(), 2);
        assert_eq!(d.nodes(), c.nodes());
        assert!((d.at(0.3).theta[0].integral(0) - c.at(0.3).theta[0].integral(0)).abs() < 1e-14);
    }
}
