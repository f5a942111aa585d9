use std::sync::Arc;

use serde::Serialize;

use super::blocks::{BlockSamples, BlockSource};
use super::tiled::TiledField;
use super::tiling::BlockTable;
use crate::error::{Error, Result};
use crate::numerics::fit::level_slope;
use crate::spectral::{Fft2, SpectralField};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScalingSettings {
    pub n_max: u32,
    pub alpha: f64,
    /// Block time at which the fields are compared across levels.
    pub tau: f64,
    /// Block grid used for the structural norms.
    pub block_res: usize,
    /// Largest grid materialised for the Fourier norms.
    pub spectral_res: usize,
    /// Low-frequency mass allowed at level 1 when calibrating the cutoff.
    pub mass_threshold: f64,
}

impl Default for ScalingSettings {
    fn default() -> Self {
        ScalingSettings { n_max: 3, alpha: 0.5, tau: 0.5, block_res: 400, spectral_res: 4000, mass_threshold: 0.1 }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LevelRow {
    pub level: u32,
    pub mean: f64,
    pub l2_sq: f64,
    pub grad_rho_sup: f64,
    pub v_holder: f64,
    pub vgradv_holder: f64,
    pub h_minus1: f64,
    /// `||P_{<= Lambda 5^n} rho_n||`, with `Lambda` calibrated at level 1.
    pub low_freq_mass: f64,
    /// Resolution at which the Fourier norms were taken.
    pub spectral_res: usize,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScalingSlopes {
    pub grad_rho: f64,
    pub v_holder: f64,
    pub vgradv_holder: f64,
    pub h_minus1: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingReport {
    pub settings: ScalingSettings,
    pub rows: Vec<LevelRow>,
    pub slopes: ScalingSlopes,
    pub lambda: f64,
    /// Cells between the block supports and the block edges.
    pub edge_clearance: usize,
}

/// Cell averages of `base` on a `k x k` grid, sampling afresh if `k` does not divide it.
fn samples_at(source: &dyn BlockSource, base: &BlockSamples, k: usize) -> Result<BlockSamples> {
    if k == base.k {
        return Ok(base.clone());
    }
    if base.k % k == 0 {
        return base.coarsen(base.k / k);
    }
    source.sample(k, base.tau)
}

/// Norms of `rho_n, v_n` for `n = 0..=n_max` and their fitted exponents in base 5.
pub fn scaling_diagnostics(source: &dyn BlockSource, table: &BlockTable, settings: ScalingSettings) -> Result<ScalingReport> {
    table.validate()?;
    if settings.n_max > 4 {
        return Err(Error::Config(format!("n_max = {} exceeds the cap of 4", settings.n_max)));
    }
    if settings.n_max < 1 {
        return Err(Error::Config("scaling needs at least two levels".into()));
    }
    let base = source.sample(settings.block_res, settings.tau)?;
    let mut rows = Vec::new();
    let mut spectra = Vec::new();
    let mut clearance = usize::MAX;
    for level in 0..=settings.n_max {
        let assign = Arc::new(table.assignment(level));
        let rho = TiledField::scalar(level, assign.clone(), &base)?;
        let v = TiledField::velocity(level, assign.clone(), &base)?;
        clearance = clearance.min(rho.edge_clearance()).min(v.edge_clearance());
        let grad = rho.gradient()?;
        let grad_sup = grad.blocks().iter().map(|b| b.sup_norm()).fold(0.0, f64::max) * grad.scale();
        let side = BlockTable::side(level);
        let k = (settings.spectral_res / side).min(settings.block_res);
        let fine = samples_at(source, &base, k)?;
        let grid = TiledField::scalar(level, assign, &fine)?.materialise();
        let fft = Fft2::new(grid.res())?;
        let spec = SpectralField::from_grid(&fft, &grid, 0)?;
        rows.push(LevelRow {
            level,
            mean: rho.integral(0),
            l2_sq: rho.l2_sq(),
            grad_rho_sup: grad_sup,
            v_holder: v.holder_norm(settings.alpha),
            vgradv_holder: v.advective_derivative()?.holder_norm(settings.alpha),
            h_minus1: spec.h_minus1_norm(&fft)?,
            low_freq_mass: f64::NAN,
            spectral_res: grid.res(),
        });
        spectra.push((fft, spec));
    }
    let lambda = calibrate_cutoff(&spectra[1].0, &spectra[1].1, settings.mass_threshold) / 5.0;
    for (row, (fft, spec)) in rows.iter_mut().zip(&spectra) {
        row.low_freq_mass = spec.low_freq_mass(fft, lambda * 5f64.powi(row.level as i32));
    }
    let levels: Vec<f64> = rows.iter().map(|r| r.level as f64).collect();
    let fit = |f: fn(&LevelRow) -> f64| level_slope(&levels, &rows.iter().map(f).collect::<Vec<_>>(), 5.0);
    let slopes = ScalingSlopes {
        grad_rho: fit(|r| r.grad_rho_sup),
        v_holder: fit(|r| r.v_holder),
        vgradv_holder: fit(|r| r.vgradv_holder),
        h_minus1: fit(|r| r.h_minus1),
    };
    Ok(ScalingReport { settings, rows, slopes, lambda, edge_clearance: clearance })
}

/// Largest angular cutoff `K` whose low band carries mass at most `threshold`.
pub fn calibrate_cutoff(fft: &Fft2, f: &SpectralField, threshold: f64) -> f64 {
    let mut shells: Vec<(f64, f64)> = f
        .coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let k = fft.wavevector(i);
            (k[0] * k[0] + k[1] * k[1], fft.weight(i) * c.norm_sqr())
        })
        .collect();
    shells.sort_by(|a, b| a.0.total_cmp(&b.0));
    let limit = threshold * threshold;
    let mut acc = 0.0;
    let mut best = 0.0;
    let mut i = 0;
    while i < shells.len() {
        let k2 = shells[i].0;
        // `kx^2 + ky^2` of equal integer norm can differ in the last bits.
        while i < shells.len() && shells[i].0 <= k2 * (1.0 + 1e-9) {
            acc += shells[i].1;
            i += 1;
        }
        if acc > limit {
            break;
        }
        best = k2.sqrt();
    }
    best
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RecursionCheck {
    pub level: u32,
    pub res: usize,
    /// `||rho_n(., 1) - rho_{n+1}(., 0)||_{L^2}`.
    pub mismatch: f64,
    /// `2 h ||grad rho_{n+1}(., 0)||_inf`, the bilinear interpolation bound.
    pub tolerance: f64,
    /// `||rho_{n+1}(., 0)||_{L^2}`.
    pub scale: f64,
}

impl RecursionCheck {
    /// The interpolation bound, capped at a tenth of the field so a coarse grid cannot pass anything.
    pub fn holds(&self) -> bool {
        self.mismatch <= self.tolerance.min(0.1 * self.scale)
    }
}

/// Compare the end state of level `n` with the start of level `n + 1` at `res`.
pub fn verify_recursion(source: &dyn BlockSource, table: &BlockTable, level: u32, res: usize) -> Result<RecursionCheck> {
    table.validate()?;
    let fine_side = BlockTable::side(level + 1);
    if res % fine_side != 0 {
        return Err(Error::Tiling(format!("resolution {res} is not a multiple of {fine_side}")));
    }
    let end = source.sample(res / BlockTable::side(level), 1.0)?;
    let start = source.sample(res / fine_side, 0.0)?;
    let a = TiledField::scalar(level, Arc::new(table.assignment(level)), &end)?;
    let b = TiledField::scalar(level + 1, Arc::new(table.assignment(level + 1)), &start)?;
    let grad = b.gradient()?;
    let grad_sup = grad.blocks().iter().map(|g| g.sup_norm()).fold(0.0, f64::max) * grad.scale();
    let mismatch = a.materialise().l2_distance(&b.materialise());
    Ok(RecursionCheck { level, res, mismatch, tolerance: 2.0 * grad_sup / res as f64, scale: b.l2_sq().sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qss::blocks::SineBlocks;

    #[test]
    fn engineered_family_patches_exactly() {
        let table = BlockTable::peano(6);
        let src = SineBlocks::new(table.clone()).unwrap();
        for level in 0..2 {
            let r = verify_recursion(&src, &table, level, 500).unwrap();
            assert!(r.mismatch <= 1e-6 && r.holds(), "{r:?}");
        }
    }

    #[test]
    fn mismatched_table_is_detected() {
        let table = BlockTable::peano(6);
        let src = SineBlocks::new(table.clone()).unwrap();
        let mut wrong = table.clone();
        for row in wrong.children.iter_mut() {
            row.iter_mut().for_each(|c| *c = (*c + 1) % 6);
        }
        let r = verify_recursion(&src, &wrong, 0, 250).unwrap();
        assert!(r.mismatch > 0.5 && !r.holds(), "{r:?}");
    }
}
