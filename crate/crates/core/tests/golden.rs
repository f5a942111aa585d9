//! The CSV layouts are part of the output contract: fixed rows must render
//! exactly as the files under `tests/golden/`.

use std::path::Path;

use qsslab::harness::{csv_string, DiagnosticsCsvRow, DissipationCsvRow, ForcingCsvRow};
use qsslab::suites::StabilityRow;

fn golden(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn dissipation_rows() {
    let rows = [
        DissipationCsvRow { m: 1, mu: 0.04, t: 0.0, grad_sq: 17363.72276894415, d_partial: 0.0 },
        DissipationCsvRow { m: 1, mu: 0.04, t: 0.002, grad_sq: 1252.2729258092456, d_partial: 0.40364979697489745 },
        DissipationCsvRow { m: 2, mu: 1.6384, t: 1.0, grad_sq: 3.2e-27, d_partial: 0.5 },
    ];
    assert_eq!(csv_string(&rows).unwrap(), golden("dissipation.csv"));
}

#[test]
fn diagnostics_rows() {
    let rows = [
        DiagnosticsCsvRow { level: 0, norm: "grad_rho_sup".into(), value: 1154.0082803164935, slope: 1.0 },
        DiagnosticsCsvRow { level: 0, norm: "h_minus1".into(), value: 0.011820249985905027, slope: -1.0169586656888214 },
        DiagnosticsCsvRow { level: 3, norm: "mean".into(), value: -2.5e-16, slope: f64::NAN },
    ];
    assert_eq!(csv_string(&rows).unwrap(), golden("diagnostics.csv"));
}

#[test]
fn forcing_rows() {
    let rows = [
        ForcingCsvRow { m: 1, mu: 0.04, forcing: 6.398e6, transport: 2.5e4, viscous: 6.39e6 },
        ForcingCsvRow { m: 2, mu: 1.6384, forcing: 8.251e9, transport: 8.9e4, viscous: 8.25e9 },
    ];
    assert_eq!(csv_string(&rows).unwrap(), golden("forcing.csv"));
}

#[test]
fn stability_rows() {
    let rows = [StabilityRow { eps: 0.1, phi_c2: 0.25, psi_c1: 0.125, hausdorff: 1e-3, velocity_c1: 2.0, theta_c1: 3.5 }];
    assert_eq!(csv_string(&rows).unwrap(), golden("stability.csv"));
}
