//! Norms of the quasi-self-similar family level by level and their exponents in base 5.

use std::sync::Arc;

use qsslab::fields::{LocalFieldSet, SnakeFamily};
use qsslab::qss::{scaling_diagnostics, verify_recursion, BlockTable, ScalingSettings};

fn main() -> qsslab::Result<()> {
    let set = LocalFieldSet::new(Arc::new(SnakeFamily::default()))?;
    let table = BlockTable::peano(set.blocks());
    let r = scaling_diagnostics(&set, &table, ScalingSettings::default())?;
    println!("level  |grad rho|_inf  |v|_C1/2   |v.grad v|_C1/2  H^-1       low-freq");
    for row in &r.rows {
        println!(
            "{:>5}  {:>14.4}  {:>9.4}  {:>15.4}  {:.4e}  {:.4}",
            row.level, row.grad_rho_sup, row.v_holder, row.vgradv_holder, row.h_minus1, row.low_freq_mass
        );
    }
    let s = r.slopes;
    println!("slopes {:.3} {:.3} {:.3} {:.3}  (Lambda {:.1})", s.grad_rho, s.v_holder, s.vgradv_holder, s.h_minus1, r.lambda);
    let rc = verify_recursion(&set, &table, 0, 250)?;
    println!("patching mismatch at level 0: {:.3} (|rho| {:.3}, holds {})", rc.mismatch, rc.scale, rc.holds());
    Ok(())
}
