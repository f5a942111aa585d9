//! Verifies the advection-diffusion solver at 512^2: exact heat decay, energy
//! conservation and balance, and transport of a building block against its
//! construction.

use std::sync::Arc;
use std::time::Instant;

use qsslab::fields::{LocalFieldSet, SnakeFamily};
use qsslab::suites::{solver_suite, SolverSuiteSettings};

fn main() -> qsslab::Result<()> {
    let start = Instant::now();
    let set = LocalFieldSet::new(Arc::new(SnakeFamily::default()))?;
    let r = solver_suite(&set, &SolverSuiteSettings::default())?;
    println!("resolution          {}", r.res);
    println!("heat decay error    {:.3e}", r.heat_error);
    println!("inviscid drift      {:.3e}", r.conservation_error);
    println!("energy identity     {:.3e}", r.identity_error);
    println!("transport error     {:.3e}", r.transport_error);
    println!("interpolation error {:.3e}", r.interpolation_error);
    println!("steps {}  passed {}  ({:.1?})", r.steps, r.passed(), start.elapsed());
    Ok(())
}
