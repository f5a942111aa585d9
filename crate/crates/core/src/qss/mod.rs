//! Quasi-self-similar fields: block fields tiled on the `2 5^n` grids.

mod blocks;
mod diagnostics;
mod tiled;
mod tiling;

pub use blocks::{BlockSamples, BlockSource, SineBlocks};
pub use diagnostics::{calibrate_cutoff, scaling_diagnostics, verify_recursion, LevelRow, RecursionCheck, ScalingReport, ScalingSettings, ScalingSlopes};
pub use tiled::{assemble, block_res_for, TiledField};
pub use tiling::{serpentine, BlockTable, REFINE};
