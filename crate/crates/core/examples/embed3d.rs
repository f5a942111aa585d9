//! Lift the smoothed family to a 3D flow independent of `x_3` and check the
//! identities and residuals of the lifted system.

use std::sync::Arc;

use qsslab::embed3d::{embed_experiment, EmbedSettings};
use qsslab::fields::{LocalFieldSet, SnakeFamily};
use qsslab::qss::BlockTable;
use qsslab::smoothing::{BlockCache, SmoothedFamily, TimeSchedule};

fn main() -> qsslab::Result<()> {
    let set = LocalFieldSet::new(Arc::new(SnakeFamily::default()))?;
    let table = BlockTable::peano(set.blocks());
    let cache = BlockCache::build(&set, 50, 17)?;
    let fam = SmoothedFamily::new(&cache, &table, TimeSchedule::new(1)?, 200)?;
    let r = embed_experiment(&fam, &EmbedSettings { times: 6, ..EmbedSettings::default() })?;
    for (s, c) in r.samples.iter().zip(&r.identities) {
        println!(
            "t {:.4}  residual {:.2e} / {:.2e}  budget {:.2e}  gradient defect {:.1e}  div f {:.1e}",
            s.t, s.horizontal, s.vertical, s.budget, c.relative_defect, c.forcing_divergence
        );
    }
    println!("residuals {}  identities {}  dissipation budget {}", r.residuals_hold(), r.identities_hold(1e-10), r.dissipation.holds());
    Ok(())
}
