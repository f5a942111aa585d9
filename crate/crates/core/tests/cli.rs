//! The binary's exit codes, printed configuration and byte-identical reruns.

use std::path::Path;
use std::process::{Command, Output};

use qsslab::grid::GridField;
use qsslab::spectral::{AdvectionDiffusion, SolverSettings, SteadyVelocity};
use qsslab::Error;

fn qsslab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsslab")).args(args).current_dir(dir).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// A cheap scaling configuration over the required keys.
const SMALL: &str = "family = snake\neps = 0.1, 0.01\nn_max = 2\nbuild_levels = 1\nblock_res = 100\nspectral_res = 500\nbuild_res = 200\n";

#[test]
fn missing_required_key_exits_2_naming_it() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.cfg"), "family = snake\n").unwrap();
    let o = qsslab(&["--config", "c.cfg", "geometry-check"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("eps"), "{}", stderr(&o));
}

#[test]
fn bad_values_and_unknown_keys_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for (text, key) in [
        ("family = snake\neps = 0.1, 0.01\ncfl = 1.5\n", "cfl"),
        ("family = snake\neps = 0.1, 0.01\nspeling = 3\n", "speling"),
        ("family = torus\neps = 0.1, 0.01\n", "family"),
        ("family = snake\neps = 0.1, 0.01\nsolver_res = many\n", "solver_res"),
    ] {
        std::fs::write(dir.path().join("c.cfg"), text).unwrap();
        let o = qsslab(&["--config", "c.cfg", "scaling"], dir.path());
        assert_eq!(o.status.code(), Some(2), "{text}");
        assert!(stderr(&o).contains(key), "{text}: {}", stderr(&o));
    }
}

#[test]
fn print_config_shows_defaults_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let o = qsslab(&["--print-config"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("eps = 0.1, 0.01, 0.001, 0.0001"));
    // The printed defaults are themselves a valid config.
    std::fs::write(dir.path().join("d.cfg"), &text).unwrap();
    let o = qsslab(&["--config", "d.cfg", "--seed", "9", "--print-config"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(String::from_utf8(o.stdout).unwrap().contains("seed = 9\n"));
}

#[test]
fn report_without_results_is_a_contract_failure() {
    let dir = tempfile::tempdir().unwrap();
    let o = qsslab(&["--out", "empty", "report"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn solver_abort_maps_to_exit_3() {
    let n = 16;
    let s = AdvectionDiffusion::new(n, 0.0).unwrap();
    let th = GridField::from_fn(n, |x| (6.0 * x[0]).sin());
    let v = SteadyVelocity::from_grid(&GridField::vector_from_fn(n, |_| [1.0, 0.0]));
    let err = s.run(&v, &th, (0.0, 1.0), SolverSettings { dt: 0.5, ..Default::default() }, &[], |_, _| Ok(())).unwrap_err();
    assert!(matches!(err, Error::Solver(_)));
    assert_eq!(err.exit_code(), 3);
}

/// Every file under `root` as (relative path, bytes), sorted.
fn tree(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(root).unwrap().display().to_string(), std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.cfg"), SMALL).unwrap();
    for out in ["a", "b"] {
        for cmd in ["geometry-check", "scaling", "build-family"] {
            let o = qsslab(&["--config", "c.cfg", "--seed", "5", "--out", out, cmd], dir.path());
            assert_eq!(o.status.code(), Some(0), "{cmd}: {}", stderr(&o));
        }
    }
    let (a, b) = (tree(&dir.path().join("a")), tree(&dir.path().join("b")));
    assert_eq!(a.len(), b.len());
    assert!(a.len() >= 8);
    for ((na, da), (nb, db)) in a.iter().zip(&b) {
        assert_eq!(na, nb);
        assert!(da == db, "{na} differs between runs");
    }
}

#[test]
fn every_json_carries_provenance() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.cfg"), SMALL).unwrap();
    for cmd in ["geometry-check", "scaling"] {
        assert_eq!(qsslab(&["--config", "c.cfg", cmd], dir.path()).status.code(), Some(0));
    }
    qsslab(&["report"], dir.path());
    let files: Vec<_> = tree(&dir.path().join("out")).into_iter().filter(|(n, _)| n.ends_with(".json")).collect();
    assert!(files.len() >= 5);
    for (name, bytes) in files {
        let v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        let p = &v["provenance"];
        assert!(p["producer"].as_str().unwrap().starts_with("qsslab"), "{name}");
        assert_eq!(p["config"]["family"], "snake", "{name}");
    }
    let csv = std::fs::read_to_string(dir.path().join("out/scaling/diagnostics.csv")).unwrap();
    assert!(csv.starts_with("level,norm,value,slope\n"));
}
