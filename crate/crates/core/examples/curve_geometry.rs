//! Frenet data of a sampled circle, and the swept area of a normal offset
//! against the annulus it must equal.

use std::f64::consts::PI;

use qsslab::curve::{area_difference, length_after, Curve};

fn main() -> qsslab::Result<()> {
    let r = 0.2;
    // Clockwise, so the left normal points outwards.
    let circle = Curve::from_fn(|s| [0.5 + r * s.cos(), 0.5 - r * s.sin()], 256, true, 2.0 * PI)?;
    let fr = circle.frenet();
    println!("speed {:.12}  curvature {:.12}  length {:.12}", fr.speed[0], fr.kappa[0], circle.length());
    for c in [1e-3, 1e-2, 5e-2] {
        let h = vec![c; circle.len()];
        let exact = PI * ((r + c).powi(2) - r * r);
        let got = area_difference(&circle, &h);
        println!("offset {c:<6} area {got:.15}  annulus {exact:.15}  rel {:.2e}  length {:.9}", (got / exact - 1.0).abs(), length_after(&circle, &h));
    }
    Ok(())
}
