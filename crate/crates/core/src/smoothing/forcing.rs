use std::sync::Arc;

use serde::Serialize;

use super::family::FORCING_STEP;
use super::schedule::TimeSchedule;
use crate::error::{Error, Result};
use crate::grid::GridField;
use crate::numerics::bump::{smooth_step, smooth_step_prime};
use crate::qss::{BlockSource, BlockTable, TiledField};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ForcingSettings {
    pub m_max: u32,
    pub alpha: f64,
    /// Block grid for the tile-wise derivatives.
    pub block_res: usize,
    /// Interior sample times per interval.
    pub times: usize,
}

impl Default for ForcingSettings {
    fn default() -> Self {
        ForcingSettings { m_max: 3, alpha: 0.5, block_res: 100, times: 8 }
    }
}

/// Hölder norms of the forcing at one time.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ForcingSample {
    pub m: u32,
    pub level: u32,
    pub t: f64,
    /// `||g^m||_{C^alpha}`.
    pub forcing: f64,
    /// `||d_t v^m + v^m . grad v^m||_{C^alpha}`.
    pub transport: f64,
    /// `mu_m ||Lap v^m||_{C^alpha}`.
    pub viscous: f64,
}

/// Suprema over the sampled times for one cutoff `m`.
#[derive(Debug, Clone, Serialize)]
pub struct ForcingNorms {
    pub m: u32,
    pub mu: f64,
    pub forcing: f64,
    pub transport: f64,
    pub viscous: f64,
    pub samples: Vec<ForcingSample>,
}

/// Tile-wise pieces of `v^m` on one level at one time, all with scale `1 / side`.
struct Pieces {
    level: u32,
    t: f64,
    transport: TiledField,
    laplacian: TiledField,
}

fn combine(a: &[GridField], b: &[GridField], wa: f64, wb: f64) -> Vec<GridField> {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let data = x.data().iter().zip(y.data()).map(|(p, q)| wa * p + wb * q).collect();
            GridField::from_data(x.res(), x.comps(), data).expect("grid size")
        })
        .collect()
}

fn pieces(source: &dyn BlockSource, assign: Arc<Vec<u16>>, level: u32, x: f64, k: usize) -> Result<Pieces> {
    let (t0, dt) = (TimeSchedule::junction(level), TimeSchedule::interval(level));
    let side = BlockTable::side(level) as f64;
    let a = |x: f64| smooth_step_prime(x) / dt;
    let h = FORCING_STEP;
    let now = source.sample(k, smooth_step(x))?;
    let plus = source.sample(k, smooth_step(x + h))?;
    let minus = source.sample(k, smooth_step(x - h))?;
    // d_t (a V) with the step h dt in t, i.e. h in x.
    let rate = combine(&plus.vel, &minus.vel, a(x + h) / (2.0 * h * dt), -a(x - h) / (2.0 * h * dt));
    let v = TiledField::new(level, assign, now.vel.clone(), a(x) / side)?;
    let adv = v.advective_derivative()?;
    // adv has scale a^2 / side; bring its blocks to scale 1 / side.
    let adv_blocks: Vec<GridField> = adv.blocks().iter().map(|b| b.scaled(adv.scale() * side)).collect();
    let transport = v.with_blocks(combine(&rate, &adv_blocks, 1.0, 1.0), 1.0 / side)?;
    let lap = v.laplacian()?;
    let laplacian = v.with_blocks(lap.blocks().iter().map(|b| b.scaled(lap.scale() * side)).collect(), 1.0 / side)?;
    Ok(Pieces { level, t: t0 + dt * x, transport, laplacian })
}

/// `||g^m||_{C^alpha}` and its viscous part for `m = 1..=m_max`, sampled on every interval `n <= m`.
///
/// Derivatives are taken block by block, so the level-3 fields never need a full grid.
pub fn forcing_sweep(source: &dyn BlockSource, table: &BlockTable, settings: ForcingSettings) -> Result<Vec<ForcingNorms>> {
    table.validate()?;
    TimeSchedule::new(settings.m_max)?;
    if settings.times == 0 {
        return Err(Error::Config("forcing sweep needs at least one sample time".into()));
    }
    let mut all = Vec::new();
    for level in 0..=settings.m_max {
        let assign = Arc::new(table.assignment(level));
        for j in 1..=settings.times {
            let x = j as f64 / (settings.times + 1) as f64;
            all.push(pieces(source, assign.clone(), level, x, settings.block_res)?);
        }
    }
    let mut out = Vec::new();
    for m in 1..=settings.m_max {
        let mu = TimeSchedule::new(m)?.viscosity();
        let mut samples = Vec::new();
        for p in all.iter().filter(|p| p.level <= m) {
            let g = combine(p.transport.blocks(), p.laplacian.blocks(), 1.0, -mu);
            let g = p.transport.with_blocks(g, p.transport.scale())?;
            samples.push(ForcingSample {
                m,
                level: p.level,
                t: p.t,
                forcing: g.holder_norm(settings.alpha),
                transport: p.transport.holder_norm(settings.alpha),
                viscous: mu * p.laplacian.holder_norm(settings.alpha),
            });
        }
        let sup = |f: fn(&ForcingSample) -> f64| samples.iter().map(f).fold(0.0, f64::max);
        out.push(ForcingNorms { m, mu, forcing: sup(|s| s.forcing), transport: sup(|s| s.transport), viscous: sup(|s| s.viscous), samples });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qss::SineBlocks;

    #[test]
    fn static_family_has_no_forcing() {
        let table = BlockTable::peano(6);
        let src = SineBlocks::new(table.clone()).unwrap();
        let s = ForcingSettings { m_max: 2, block_res: 20, times: 2, ..Default::default() };
        let r = forcing_sweep(&src, &table, s).unwrap();
        assert_eq!(r.len(), 2);
        assert!(r.iter().all(|n| n.forcing == 0.0 && n.viscous == 0.0));
        assert_eq!(r[1].samples.len(), 6);
    }
}
