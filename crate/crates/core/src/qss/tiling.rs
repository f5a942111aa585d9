use serde::Serialize;

use crate::error::{Error, Result};

/// Side of the subdivision used by one refinement step.
pub const REFINE: usize = 5;

/// Block assignment for every level of the 5-adic tiling.
///
/// Level 0 tiles the square by `2 x 2` tiles using `base`; a level-`n` tile of
/// type `i` splits into `5 x 5` tiles of level `n + 1` whose types are
/// `children[i][5 b + a]` for the sub-square in column `a`, row `b`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockTable {
    pub blocks: usize,
    pub base: [usize; 4],
    pub children: Vec<[usize; 25]>,
}

/// Position of cell `(i, j)` along the boustrophedon path through a `side x side` grid.
pub fn serpentine(side: usize, i: usize, j: usize) -> usize {
    j * side + if j % 2 == 0 { i } else { side - 1 - i }
}

impl BlockTable {
    /// Blocks assigned cyclically along a serpentine traversal, offset by the parent type.
    pub fn peano(blocks: usize) -> Self {
        let mut base = [0; 4];
        for j in 0..2 {
            for i in 0..2 {
                base[2 * j + i] = serpentine(2, i, j) % blocks;
            }
        }
        let children = (0..blocks)
            .map(|p| {
                let mut c = [0; 25];
                for b in 0..REFINE {
                    for a in 0..REFINE {
                        c[REFINE * b + a] = (p + serpentine(REFINE, a, b)) % blocks;
                    }
                }
                c
            })
            .collect();
        BlockTable { blocks, base, children }
    }

    pub fn validate(&self) -> Result<()> {
        if self.blocks == 0 {
            return Err(Error::Tiling("block table needs at least one block".into()));
        }
        if self.children.len() != self.blocks {
            return Err(Error::Tiling(format!("{} child rows for {} blocks", self.children.len(), self.blocks)));
        }
        let bad = self.base.iter().chain(self.children.iter().flatten()).find(|&&b| b >= self.blocks);
        if let Some(b) = bad {
            return Err(Error::Tiling(format!("block index {b} out of range 0..{}", self.blocks)));
        }
        Ok(())
    }

    /// Tiles per side at `level`.
    pub fn side(level: u32) -> usize {
        2 * REFINE.pow(level)
    }

    /// Type of every tile at `level`, row-major with row `j` at height `j / side`.
    pub fn assignment(&self, level: u32) -> Vec<u16> {
        let mut side = 2;
        let mut cur: Vec<u16> = self.base.iter().map(|&b| b as u16).collect();
        for _ in 0..level {
            let next_side = side * REFINE;
            let mut next = vec![0u16; next_side * next_side];
            for j in 0..next_side {
                for i in 0..next_side {
                    let parent = cur[(j / REFINE) * side + i / REFINE] as usize;
                    next[j * next_side + i] = self.children[parent][REFINE * (j % REFINE) + i % REFINE] as u16;
                }
            }
            cur = next;
            side = next_side;
        }
        cur
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serpentine_visits_every_cell_once() {
        let mut seen = [false; 25];
        for j in 0..5 {
            for i in 0..5 {
                seen[serpentine(5, i, j)] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
        // Consecutive cells along the path are neighbours.
        assert_eq!(serpentine(5, 4, 0) + 1, serpentine(5, 4, 1));
    }

    #[test]
    fn assignment_refines_parents() {
        let t = BlockTable::peano(6);
        t.validate().unwrap();
        let a0 = t.assignment(0);
        let a1 = t.assignment(1);
        assert_eq!(a0.len(), 4);
        assert_eq!(a1.len(), 100);
        // Tile (7, 3) of level 1 sits in parent (1, 0), sub-square (2, 3).
        assert_eq!(a1[3 * 10 + 7] as usize, t.children[a0[1] as usize][5 * 3 + 2]);
        assert!(a1.iter().all(|&b| (b as usize) < 6));
    }

    #[test]
    fn bad_entries_are_rejected() {
        let mut t = BlockTable::peano(3);
        t.children[1][4] = 7;
        assert!(t.validate().is_err());
    }
}
