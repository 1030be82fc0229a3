use std::fs;
use std::path::Path;
use std::process::Command;

use blowup_lab::output::{read_header, RunManifest};

fn lab(args: &[&str], out: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_blowup-lab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

#[test]
fn solve_writes_verifiable_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(&["solve", "--alpha", "1", "--epsilon", "0.1", "--n-modes", "32"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let m = RunManifest::load(&RunManifest::manifest_path(dir.path(), "solve")).unwrap();
    assert_eq!(m.status, "ok");
    assert_eq!(m.params["n_modes"], 32);
    assert_eq!(m.files.len(), 2);
    assert!(m.verify(dir.path()).is_empty());

    let header = read_header(&dir.path().join("trajectory.csv")).unwrap();
    assert_eq!(header["manifest_hash"], m.config_hash.as_str());
    let t_c = header["data"]["t_c"].as_f64().unwrap();
    assert!((t_c - 0.955542).abs() < 1e-4, "{t_c}");

    let ok = lab(&["solve", "--verify"], dir.path());
    assert!(ok.status.success());
    fs::write(dir.path().join("trajectory.csv"), "tampered").unwrap();
    let bad = lab(&["solve", "--verify"], dir.path());
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("hash mismatch"));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"alpha": 4.0, "epsilon": 0.1, "n_modes": 16, "seed": 5}"#).unwrap();
    let out = lab(&["solve", "--config", cfg.to_str().unwrap(), "--alpha", "1"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let m = RunManifest::load(&RunManifest::manifest_path(dir.path(), "solve")).unwrap();
    assert_eq!((m.params["alpha"].as_f64(), m.params["n_modes"].as_u64(), m.rng_seed), (Some(1.0), Some(16), 5));
}

#[test]
fn bad_input_is_fatal() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(&["solve", "--alpha", "0.1", "--epsilon", "0.2"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"alfa": 1.0}"#).unwrap();
    assert_eq!(lab(&["solve", "--config", cfg.to_str().unwrap()], dir.path()).status.code(), Some(1));
    assert_eq!(lab(&["table1", "--verify"], dir.path()).status.code(), Some(1));
}

#[test]
fn identical_runs_write_identical_files() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["snapshots", "--alpha", "0.25", "--epsilon", "0.1", "--n-modes", "32", "--seed", "11"];
    assert!(lab(&args, a.path()).status.success());
    assert!(lab(&args, b.path()).status.success());
    let read = |d: &Path| fs::read(d.join("fourier_snapshots.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}
