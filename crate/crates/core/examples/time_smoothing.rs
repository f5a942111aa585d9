//! The junction schedule, the smooth reparametrisation and the size of the
//! forcing that the smoothed family needs.

use std::sync::Arc;

use qsslab::fields::{LocalFieldSet, SnakeFamily};
use qsslab::qss::BlockTable;
use qsslab::smoothing::{forcing_sweep, ForcingSettings, Reparametrisation, TimeSchedule};

fn main() -> qsslab::Result<()> {
    for m in 1..=4 {
        let s = TimeSchedule::new(m)?;
        println!("m {m}  mu {:.4}  end {:.4}", s.viscosity(), s.end());
    }
    for n in 0..4 {
        println!("t_{n} = {:.6}  dt_{n} = {:.6}", TimeSchedule::junction(n), TimeSchedule::interval(n));
    }
    let eta = Reparametrisation;
    let t = 0.5 * (TimeSchedule::junction(1) + TimeSchedule::junction(2));
    println!("eta({t:.4}) = {:.6}  eta' = {:.4}", eta.eta(t), eta.eta_prime(t));

    let set = LocalFieldSet::new(Arc::new(SnakeFamily::default()))?;
    let table = BlockTable::peano(set.blocks());
    let f = forcing_sweep(&set, &table, ForcingSettings { m_max: 2, block_res: 60, times: 4, ..ForcingSettings::default() })?;
    for x in &f {
        println!("m {}  ||g|| {:.3e}  transport {:.3e}  viscous {:.3e}", x.m, x.forcing, x.transport, x.viscous);
    }
    Ok(())
}
