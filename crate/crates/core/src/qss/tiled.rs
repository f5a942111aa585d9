use std::collections::BTreeSet;
use std::sync::Arc;

use rayon::prelude::*;

use super::blocks::BlockSamples;
use super::tiling::BlockTable;
use crate::error::{Error, Result};
use crate::grid::GridField;

/// A level-`n` field held as its block grids and the tile assignment.
///
/// The value on tile `Q` of type `i` is `scale * B_i(side (x - r_Q))`; nothing is
/// materialised unless asked for, so norms can be taken at block resolution on
/// levels whose full grid would not fit in memory.
#[derive(Debug, Clone)]
pub struct TiledField {
    pub level: u32,
    side: usize,
    assign: Arc<Vec<u16>>,
    blocks: Vec<GridField>,
    scale: f64,
}

impl TiledField {
    pub fn new(level: u32, assign: Arc<Vec<u16>>, blocks: Vec<GridField>, scale: f64) -> Result<Self> {
        let side = BlockTable::side(level);
        if assign.len() != side * side {
            return Err(Error::Tiling(format!("assignment has {} tiles, level {level} needs {}", assign.len(), side * side)));
        }
        let (k, c) = (blocks[0].res(), blocks[0].comps());
        if blocks.iter().any(|b| b.res() != k || b.comps() != c) {
            return Err(Error::Tiling("block grids differ in size".into()));
        }
        if let Some(&bad) = assign.iter().find(|&&t| t as usize >= blocks.len()) {
            return Err(Error::Tiling(format!("tile type {bad} has no block")));
        }
        Ok(TiledField { level, side, assign, blocks, scale })
    }

    /// `rho_n` from the scalar blocks.
    pub fn scalar(level: u32, assign: Arc<Vec<u16>>, s: &BlockSamples) -> Result<Self> {
        Self::new(level, assign, s.theta.clone(), 1.0)
    }

    /// `v_n` from the velocity blocks, scaled by `1 / (2 5^n)`.
    pub fn velocity(level: u32, assign: Arc<Vec<u16>>, s: &BlockSamples) -> Result<Self> {
        let scale = 1.0 / BlockTable::side(level) as f64;
        Self::new(level, assign, s.vel.clone(), scale)
    }

    /// Same tiling with other block data and scale.
    pub fn with_blocks(&self, blocks: Vec<GridField>, scale: f64) -> Result<Self> {
        Self::new(self.level, self.assign.clone(), blocks, scale)
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn block_res(&self) -> usize {
        self.blocks[0].res()
    }

    pub fn comps(&self) -> usize {
        self.blocks[0].comps()
    }

    pub fn blocks(&self) -> &[GridField] {
        &self.blocks
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Resolution of the materialised grid.
    pub fn res(&self) -> usize {
        self.side * self.block_res()
    }

    fn counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.blocks.len()];
        self.assign.iter().for_each(|&t| c[t as usize] += 1);
        c
    }

    fn used(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.counts().into_iter().enumerate().filter(|&(_, n)| n > 0).collect::<Vec<_>>().into_iter()
    }

    pub fn sup_norm(&self) -> f64 {
        self.used().map(|(i, _)| self.blocks[i].sup_norm()).fold(0.0, f64::max) * self.scale
    }

    pub fn integral(&self, c: usize) -> f64 {
        let tiles = (self.side * self.side) as f64;
        self.used().map(|(i, n)| n as f64 * self.blocks[i].integral(c)).sum::<f64>() * self.scale / tiles
    }

    pub fn l2_sq(&self) -> f64 {
        let tiles = (self.side * self.side) as f64;
        self.used().map(|(i, n)| n as f64 * self.blocks[i].l2_sq()).sum::<f64>() * self.scale * self.scale / tiles
    }

    /// Tile-wise gradient of a scalar field: blocks differentiated on their own
    /// grid, times `side`. Exact for the tiled field when the blocks vanish near
    /// their edges, which `edge_clearance` checks.
    pub fn gradient(&self) -> Result<TiledField> {
        if self.comps() != 1 {
            return Err(Error::Tiling("gradient of a vector field requested".into()));
        }
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                let [gx, gy] = b.gradient(0);
                GridField::from_data(b.res(), 2, [gx, gy].concat()).expect("grid size")
            })
            .collect();
        self.with_blocks(blocks, self.scale * self.side as f64)
    }

    /// `v . grad v` of a tiled velocity, `scale^2 side (V . grad V)` tile-wise.
    pub fn advective_derivative(&self) -> Result<TiledField> {
        if self.comps() != 2 {
            return Err(Error::Tiling("advective derivative needs a vector field".into()));
        }
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                let n2 = b.res() * b.res();
                let g0 = b.gradient(0);
                let g1 = b.gradient(1);
                let (v0, v1) = (b.comp(0), b.comp(1));
                let mut data = vec![0.0; 2 * n2];
                for p in 0..n2 {
                    data[p] = v0[p] * g0[0][p] + v1[p] * g0[1][p];
                    data[n2 + p] = v0[p] * g1[0][p] + v1[p] * g1[1][p];
                }
                GridField::from_data(b.res(), 2, data).expect("grid size")
            })
            .collect();
        self.with_blocks(blocks, self.scale * self.scale * self.side as f64)
    }

    /// Component-wise Laplacian, `scale side^2 Lap B` tile-wise.
    pub fn laplacian(&self) -> Result<TiledField> {
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                let data = (0..b.comps()).flat_map(|c| b.laplacian(c)).collect();
                GridField::from_data(b.res(), b.comps(), data).expect("grid size")
            })
            .collect();
        let side = self.side as f64;
        self.with_blocks(blocks, self.scale * side * side)
    }

    /// Smallest distance, in block cells, from a used block's support to the block edge.
    pub fn edge_clearance(&self) -> usize {
        let k = self.block_res();
        self.used()
            .filter_map(|(i, _)| {
                let mask = self.blocks[i].support_mask(0.0);
                mask.iter()
                    .enumerate()
                    .filter(|(_, &m)| m)
                    .map(|(p, _)| {
                        let (x, y) = (p % k, p / k);
                        x.min(y).min(k - 1 - x).min(k - 1 - y)
                    })
                    .min()
            })
            .min()
            .unwrap_or(k)
    }

    /// The full grid at resolution `side * k`.
    pub fn materialise(&self) -> GridField {
        let (k, side, c) = (self.block_res(), self.side, self.comps());
        let res = self.res();
        let mut data = vec![0.0; c * res * res];
        for comp in 0..c {
            data[comp * res * res..(comp + 1) * res * res].par_chunks_mut(res).enumerate().for_each(|(row, out)| {
                let (tj, jj) = (row / k, row % k);
                for ti in 0..side {
                    let b = &self.blocks[self.assign[tj * side + ti] as usize];
                    let src = &b.comp(comp)[jj * k..(jj + 1) * k];
                    out[ti * k..(ti + 1) * k].iter_mut().zip(src).for_each(|(o, s)| *o = self.scale * s);
                }
            });
        }
        GridField::from_data(res, c, data).expect("grid size")
    }

    /// Dyadic Hoelder seminorm `max |f(x) - f(y)| / |x - y|^alpha` over pairs at
    /// distances `2^j` cells along the axes and diagonals of the virtual grid.
    ///
    /// Pairs are grouped by the types of the two tiles they touch, so the cost
    /// depends on the block resolution and the number of distinct neighbour
    /// pairs, not on the level. Shifts whose trivial bound `2 sup |f| / d^alpha`
    /// cannot beat the running maximum are skipped.
    pub fn holder_seminorm(&self, alpha: f64) -> f64 {
        let (k, side) = (self.block_res() as i64, self.side as i64);
        let res = (k * side) as f64;
        let sup = self.used().map(|(i, _)| self.blocks[i].sup_norm()).fold(0.0, f64::max);
        let mut best = 0.0f64;
        let mut d = 1i64;
        while d <= k * side / 2 {
            for dir in [(1i64, 0i64), (0, 1), (1, 1), (1, -1)] {
                let dist = d as f64 * ((dir.0 * dir.0 + dir.1 * dir.1) as f64).sqrt() / res;
                let denom = dist.powf(alpha);
                if 2.0 * sup / denom <= best {
                    continue;
                }
                let m = self.shift_max((d * dir.0, d * dir.1));
                best = best.max(m / denom);
            }
            d *= 2;
        }
        best * self.scale
    }

    /// `max_x |B(x + s) - B(x)|` over the virtual grid for a cell shift `s`.
    fn shift_max(&self, s: (i64, i64)) -> f64 {
        let (k, side) = (self.block_res() as i64, self.side as i64);
        let (qx, rx) = (s.0.div_euclid(k), s.0.rem_euclid(k));
        let (qy, ry) = (s.1.div_euclid(k), s.1.rem_euclid(k));
        let mut jobs = Vec::new();
        for (ax, x_lo, x_hi) in [(0, 0, k - rx), (1, k - rx, k)] {
            for (ay, y_lo, y_hi) in [(0, 0, k - ry), (1, k - ry, k)] {
                if x_lo >= x_hi || y_lo >= y_hi {
                    continue;
                }
                let (ox, oy) = (qx + ax, qy + ay);
                let mut pairs = BTreeSet::new();
                for tj in 0..side {
                    for ti in 0..side {
                        let a = self.assign[(tj * side + ti) as usize];
                        let (ni, nj) = ((ti + ox).rem_euclid(side), (tj + oy).rem_euclid(side));
                        pairs.insert((a, self.assign[(nj * side + ni) as usize]));
                    }
                }
                for p in pairs {
                    jobs.push((p, (x_lo, x_hi, y_lo, y_hi), (rx - ax * k, ry - ay * k)));
                }
            }
        }
        let c = self.comps();
        jobs.par_iter()
            .map(|&((a, b), (x_lo, x_hi, y_lo, y_hi), (sx, sy))| {
                let (ba, bb) = (&self.blocks[a as usize], &self.blocks[b as usize]);
                let mut m = 0.0f64;
                for y in y_lo..y_hi {
                    for x in x_lo..x_hi {
                        let p = (y * k + x) as usize;
                        let q = ((y + sy) * k + x + sx) as usize;
                        let d2: f64 = (0..c).map(|cc| (bb.comp(cc)[q] - ba.comp(cc)[p]).powi(2)).sum();
                        m = m.max(d2);
                    }
                }
                m.sqrt()
            })
            .reduce(|| 0.0, f64::max)
    }

    /// `||f||_{C^alpha} = sup |f| + [f]_alpha` in the dyadic discretisation.
    pub fn holder_norm(&self, alpha: f64) -> f64 {
        self.sup_norm() + self.holder_seminorm(alpha)
    }
}

/// Materialised `(rho_n, v_n)` on the grid of resolution `side * samples.k`.
pub fn assemble(level: u32, table: &BlockTable, samples: &BlockSamples) -> Result<(GridField, GridField)> {
    table.validate()?;
    if samples.blocks() != table.blocks {
        return Err(Error::Tiling(format!("{} block fields for a table of {} blocks", samples.blocks(), table.blocks)));
    }
    let assign = Arc::new(table.assignment(level));
    let rho = TiledField::scalar(level, assign.clone(), samples)?;
    let v = TiledField::velocity(level, assign, samples)?;
    Ok((rho.materialise(), v.materialise()))
}

/// Block grid size for assembling `level` at resolution `res`.
pub fn block_res_for(level: u32, res: usize) -> Result<usize> {
    let side = BlockTable::side(level);
    if res % side != 0 {
        return Err(Error::Tiling(format!("resolution {res} is not a multiple of {side} tiles per side at level {level}")));
    }
    Ok(res / side)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn blocks(k: usize) -> Vec<GridField> {
        vec![
            GridField::from_fn(k, |x| (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).sin()),
            GridField::from_fn(k, |x| -(2.0 * PI * x[0]).sin() * (4.0 * PI * x[1]).sin()),
        ]
    }

    #[test]
    fn virtual_norms_match_materialised_grid() {
        let mut table = BlockTable::peano(2);
        table.children[1][7] = 0;
        let assign = Arc::new(table.assignment(1));
        let f = TiledField::new(1, assign, blocks(16), 0.5).unwrap();
        let g = f.materialise();
        assert_eq!(g.res(), 160);
        assert!((f.l2_sq() - g.l2_sq()).abs() < 1e-12 * g.l2_sq());
        assert!((f.integral(0) - g.integral(0)).abs() < 1e-12);
        assert!((f.sup_norm() - g.sup_norm()).abs() < 1e-14);
    }

    #[test]
    fn holder_seminorm_matches_brute_force() {
        let table = BlockTable::peano(2);
        let f = TiledField::new(1, Arc::new(table.assignment(1)), blocks(8), 1.0).unwrap();
        let g = f.materialise();
        let n = g.res() as i64;
        let mut brute = 0.0f64;
        let mut d = 1;
        while d <= n / 2 {
            for (dx, dy) in [(d, 0), (0, d), (d, d), (d, -d)] {
                let dist = (((dx * dx + dy * dy) as f64).sqrt() / n as f64).powf(0.5);
                for y in 0..n {
                    for x in 0..n {
                        let p = (y * n + x) as usize;
                        let q = ((y + dy).rem_euclid(n) * n + (x + dx).rem_euclid(n)) as usize;
                        brute = brute.max((g.comp(0)[q] - g.comp(0)[p]).abs() / dist);
                    }
                }
            }
            d *= 2;
        }
        assert!((f.holder_seminorm(0.5) - brute).abs() < 1e-12 * brute, "{} {}", f.holder_seminorm(0.5), brute);
    }

    #[test]
    fn incompatible_resolution_is_rejected() {
        assert!(block_res_for(1, 1000).is_ok());
        assert!(block_res_for(2, 1020).is_err());
    }
}
