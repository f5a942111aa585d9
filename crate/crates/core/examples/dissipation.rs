//! One dissipation run of the smoothed family on a small grid, with the
//! comparison and frequency checks made along the way.

use std::sync::Arc;

use qsslab::dissipation::{dissipation_run, DissipationSettings};
use qsslab::fields::{LocalFieldSet, SnakeFamily};
use qsslab::qss::BlockTable;
use qsslab::smoothing::{BlockCache, SmoothedFamily, TimeSchedule};

fn main() -> qsslab::Result<()> {
    let set = LocalFieldSet::new(Arc::new(SnakeFamily::default()))?;
    let table = BlockTable::peano(set.blocks());
    let cache = BlockCache::build(&set, 50, 9)?;
    let fam = SmoothedFamily::new(&cache, &table, TimeSchedule::new(1)?, 200)?;
    let r = dissipation_run(&fam, &DissipationSettings::default())?;
    println!("m {}  mu {}  D {:.8}  steps {}  tail {:.1e}", r.m, r.mu, r.dissipation, r.steps, r.max_tail_fraction);
    for c in &r.comparisons {
        println!("t {:.2}  distance^2 {:.4}  slack {:.3}", c.t, c.distance_sq, c.slack);
    }
    for j in &r.junctions {
        println!("junction {}  cutoff {:.1}  low-frequency mass {:.2e}", j.n, j.cutoff, j.low_freq_mass);
    }
    println!("comparison {}  bernstein {}", r.comparison_holds(), r.bernstein_holds());
    Ok(())
}
