//! The area-preserving tubular map of one building-block curve: unit Jacobian,
//! inversion, and the perturbative solve for `beta`.

use std::sync::Arc;

use qsslab::area_map::{beta, beta_fixed_point, jacobian_defect, TubularMap};
use qsslab::fields::{CurveFamily, SnakeFamily};

fn main() -> qsslab::Result<()> {
    let family: Arc<dyn CurveFamily> = Arc::new(SnakeFamily::default());
    let curve = family.curve(0, 0.5)?;
    let map = TubularMap::new(curve, family.radius())?;
    println!("radius {:.4}  max |det - 1| {:.2e}", map.radius(), jacobian_defect(&map, 200, 9, 1e-5 * map.radius()));

    let (s, y) = (0.37 * map.param_len(), 0.4 * map.radius());
    let x = map.eval(s, y);
    let back = map.invert(x).expect("point lies in the tube");
    println!("Phi({s:.4}, {y:.4}) = {x:.6?}  inverse ({:.12}, {:.12})", back.0, back.1);

    let (kappa, l) = (2.0, 0.1);
    let (kt, lt) = (2.05, 0.101);
    let solve = beta_fixed_point(kappa, l, kt, lt, 0.02)?;
    let exact = beta(kt, lt, 0.02) - beta(kappa, l, 0.02);
    println!("delta beta {:.15e} vs closed form {exact:.15e} after {} iterations", solve.delta_beta, solve.iterations);
    Ok(())
}
