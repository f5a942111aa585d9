use std::f64::consts::PI;

use super::tiling::{BlockTable, REFINE};
use crate::error::{Error, Result};
use crate::fields::LocalFieldSet;
use crate::grid::GridField;

/// Anything that yields block fields `(Theta_i, V_i)` on the unit square.
pub trait BlockSource: Send + Sync {
    fn blocks(&self) -> usize;
    /// All blocks on the `k x k` cell-centre grid at block time `tau`.
    fn sample(&self, k: usize, tau: f64) -> Result<BlockSamples>;
}

/// Block fields on a common `k x k` grid.
#[derive(Debug, Clone)]
pub struct BlockSamples {
    pub k: usize,
    pub tau: f64,
    pub theta: Vec<GridField>,
    pub vel: Vec<GridField>,
}

impl BlockSamples {
    pub fn blocks(&self) -> usize {
        self.theta.len()
    }
    /// Averages over `ratio x ratio` groups of cells; keeps block means exact.
    pub fn coarsen(&self, ratio: usize) -> Result<BlockSamples> {
        if ratio == 0 || self.k % ratio != 0 {
            return Err(Error::Tiling(format!("cannot coarsen {} cells by {}", self.k, ratio)));
        }
        let k = self.k / ratio;
        let w = 1.0 / (ratio * ratio) as f64;
        let avg = |g: &GridField| {
            let mut data = vec![0.0; g.comps() * k * k];
            for c in 0..g.comps() {
                let src = g.comp(c);
                for (y, row) in src.chunks(self.k).enumerate() {
                    for (x, v) in row.iter().enumerate() {
                        data[c * k * k + (y / ratio) * k + x / ratio] += w * v;
                    }
                }
            }
            GridField::from_data(k, g.comps(), data).expect("grid size")
        };
        Ok(BlockSamples { k, tau: self.tau, theta: self.theta.iter().map(avg).collect(), vel: self.vel.iter().map(avg).collect() })
    }
}

impl BlockSource for LocalFieldSet {
    fn blocks(&self) -> usize {
        LocalFieldSet::blocks(self)
    }

    fn sample(&self, k: usize, tau: f64) -> Result<BlockSamples> {
        let (theta, vel) = self.evaluate_fields(k, tau)?.into_iter().unzip();
        Ok(BlockSamples { k, tau, theta, vel })
    }
}

/// A static test family that satisfies the patching condition exactly.
///
/// `Theta_i(x, tau) = cos(pi tau / 2) s_i S_1(x) + sin(pi tau / 2) s_{c(i, q(x))} S_5(x)`
/// with `S_m(x) = 2 sin(2 pi m x_1) sin(2 pi m x_2)`, `s_i = (-1)^i`, and
/// `c(i, q)` the child of `i` in the sub-square `q` containing `x`. Its velocity
/// is zero; it only exercises the bookkeeping of the recursion.
#[derive(Debug, Clone)]
pub struct SineBlocks {
    table: BlockTable,
}

impl SineBlocks {
    pub fn new(table: BlockTable) -> Result<Self> {
        table.validate()?;
        Ok(SineBlocks { table })
    }

    fn sign(i: usize) -> f64 {
        if i % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn theta(&self, i: usize, x: [f64; 2], tau: f64) -> f64 {
        let s = |m: f64| 2.0 * (2.0 * PI * m * x[0]).sin() * (2.0 * PI * m * x[1]).sin();
        let q = |u: f64| ((u * REFINE as f64).floor() as usize).min(REFINE - 1);
        let child = self.table.children[i][REFINE * q(x[1]) + q(x[0])];
        let (a, b) = ((0.5 * PI * tau).cos(), (0.5 * PI * tau).sin());
        a * Self::sign(i) * s(1.0) + b * Self::sign(child) * s(REFINE as f64)
    }
}

impl BlockSource for SineBlocks {
    fn blocks(&self) -> usize {
        self.table.blocks
    }

    fn sample(&self, k: usize, tau: f64) -> Result<BlockSamples> {
        let theta = (0..self.table.blocks).map(|i| GridField::from_fn(k, |x| self.theta(i, x, tau))).collect();
        let vel = (0..self.table.blocks).map(|_| GridField::zeros(k, 2)).collect();
        Ok(BlockSamples { k, tau, theta, vel })
    }
}
