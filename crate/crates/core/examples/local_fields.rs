//! Building-block fields `(V_i, Theta_i)`: how well the scalar is transported
//! by the velocity, and how divergence-free the velocity is.

use std::sync::Arc;

use qsslab::fields::{transport_residual, velocity_divergence, LocalFieldSet, SnakeFamily};

fn main() -> qsslab::Result<()> {
    let set = LocalFieldSet::new(Arc::new(SnakeFamily::default()))?;
    let k = 256;
    for t in [0.0, 0.5, 1.0] {
        let res = transport_residual(&set, k, t)?;
        let worst = res.iter().map(|r| r.residual / r.grad_sup).fold(0.0, f64::max);
        let (div, grad) = velocity_divergence(&set, 64, t)?;
        println!("t {t:.1}  transport defect / |grad Theta| {worst:.2e}  div V {div:.2e} (|grad V| {grad:.2})");
    }
    let fields = set.evaluate_fields(k, 0.5)?;
    for (i, (theta, v)) in fields.iter().enumerate() {
        println!("block {i}  int Theta {:+.2e}  ||Theta||^2 {:.6}  sup |V| {:.4}", theta.integral(0), theta.l2_sq(), v.sup_norm());
    }
    Ok(())
}
