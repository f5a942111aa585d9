//! Read a configuration over the embedded defaults and round-trip a field
//! through the binary snapshot format.

use qsslab::grid::GridField;
use qsslab::harness::{Config, Snapshot};

fn main() -> qsslab::Result<()> {
    let config = Config::parse("family = circle\neps = 0.1, 0.01\nsolver_res = 500\n")?;
    println!("{}", config.render().lines().take(6).collect::<Vec<_>>().join("\n"));
    if let Err(e) = Config::parse("family = snake\n") {
        println!("rejected: {e}");
    }

    let field = GridField::from_fn(64, |x| (x[0] * 7.0).sin() * (x[1] * 3.0).cos());
    let snap = Snapshot::new(field, 0.75, 2)?;
    let mut bytes = Vec::new();
    snap.write_to(&mut bytes)?;
    let back = Snapshot::read_from(&mut bytes.as_slice())?;
    let same = back.field.data().iter().zip(snap.field.data()).all(|(a, b)| a.to_bits() == b.to_bits());
    println!("{} bytes, kind {:?}, bit-exact {same}, time {} level {}", bytes.len(), back.kind, back.time, back.level);
    Ok(())
}
