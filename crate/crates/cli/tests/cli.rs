use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn rhdg(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rhdg"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn kovasznay_table_has_one_row_per_order_and_variant() {
    let dir = tempfile::tempdir().unwrap();
    let out = rhdg(&["kovasznay", "--k", "2..8", "--nt", "20", "--variant", "B,PR"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("errors.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().ends_with(",case"));
    assert_eq!(lines.count(), 14);
    let lambda = manifest(dir.path())["results"]["lambda_kov"].as_f64().unwrap();
    let nu = 1.0 / 40.0f64;
    let expected = 1.0 / (2.0 * nu) - (1.0 / (4.0 * nu * nu) + 4.0 * std::f64::consts::PI.powi(2)).sqrt();
    assert!((lambda - expected).abs() < 1e-12 && (lambda + 0.9637).abs() < 1e-4);
}

#[test]
fn lattice_energy_starts_at_the_initial_norm() {
    let dir = tempfile::tempdir().unwrap();
    let out = rhdg(
        &["lattice", "--k", "4", "--n", "10", "--semidisc", "d", "--dt", "1e-4", "--tend", "0.1"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("diag.csv")).unwrap();
    let first: Vec<f64> = csv.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(first[0], 0.0);
    assert!((first[1] - 0.5f64.sqrt()).abs() < 1e-6, "{}", first[1]);
    assert_eq!(csv.lines().count(), 1 + 1 + 100);
}

#[test]
fn reconstruction_check_reports_no_violations() {
    let dir = tempfile::tempdir().unwrap();
    let out = rhdg(&["reconstruct-check", "--k", "1..8", "--samples", "200"], dir.path());
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("violated constraints 0"), "{stdout}");
    let m = manifest(dir.path());
    assert!(m["results"]["max_stability"].as_f64().unwrap() <= 10.0);
    assert_eq!(fs::read_to_string(dir.path().join("reconstruct.csv")).unwrap().lines().count(), 9);
}

#[test]
fn outputs_are_deterministic_and_manifests_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    let args = ["--scenario", "manufactured", "--k", "2", "--n", "2,4", "--seed", "7"];
    assert!(rhdg(&args, &a).status.success());
    assert!(rhdg(&args, &b).status.success());
    let read = |d: &Path| fs::read(d.join("errors.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    let manifest_path = a.join("manifest.json");
    let out = rhdg(&["--manifest", manifest_path.to_str().unwrap()], &c);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(read(&a), read(&c));
    assert_eq!(manifest(&a)["config"]["refinements"], manifest(&c)["config"]["refinements"]);
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["kovasznay", "--k", "0..2"],
        vec!["lattice", "--mesh", "square:4"],
        vec!["lattice", "--dt", "-1"],
        vec!["cylinder", "--k", "2..3"],
        vec!["kovasznay", "--mesh", "file:/does/not/exist"],
        vec!["kovasznay", "--variant", "X"],
        vec!["--nu", "1"],
    ] {
        let out = rhdg(&args, dir.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn violated_invariants_exit_with_one() {
    // the default penalty is not coercive for k = 1 on right-angled meshes
    let dir = tempfile::tempdir().unwrap();
    let out = rhdg(&["infsup", "--k", "1", "--mesh", "square:4"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let out = rhdg(&["infsup", "--k", "2..3", "--mesh", "square:2"], dir.path());
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn system_dump_is_matrix_market() {
    let dir = tempfile::tempdir().unwrap();
    let mtx = dir.path().join("system.mtx");
    let out = rhdg(
        &["kovasznay", "--k", "2", "--nt", "8", "--dump-system", mtx.to_str().unwrap()],
        dir.path(),
    );
    assert!(out.status.success());
    let text = fs::read_to_string(&mtx).unwrap();
    assert!(text.starts_with("%%MatrixMarket matrix coordinate real general"));
}
