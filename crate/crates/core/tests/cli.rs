use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use comblab::cli::{resolve_out_dir, RunConfig};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_comblab"));
    c.env_remove("COMBLAB_OUT");
    c
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("comblab-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn run(out: &Path, args: &[&str]) -> Output {
    bin().arg("--out").arg(out).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn check_lines_well_formed(s: &str) {
    for l in s.lines() {
        let f: Vec<&str> = l.split(' ').collect();
        assert_eq!(f.len(), 4, "malformed line `{l}`");
        assert!(f[0] == "PASS" || f[0] == "FAIL");
    }
}

#[test]
fn help_exits_zero() {
    let o = bin().arg("--help").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("construct"));
}

#[test]
fn usage_errors_exit_two() {
    let o = bin().args(["eigen", "synth", "--m", "4", "--lambda", "2"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = bin().args(["frobnicate"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let d = scratch("missing");
    let o = run(&d, &["diag", "growth", "--measure", "absent.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_config_rejected() {
    let d = scratch("cfg");
    let cfg = d.join("c.json");
    std::fs::write(&cfg, r#"{"tolerances":{"duality":1.5}}"#).unwrap();
    let o = bin().arg("--config").arg(&cfg).args(["family", "build"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    std::fs::write(&cfg, r#"{"atom_limit":0}"#).unwrap();
    let o = bin().arg("--config").arg(&cfg).args(["family", "build"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn out_dir_precedence() {
    let cfg = RunConfig { out_dir: Some("from_cfg".into()), ..RunConfig::default() };
    assert_eq!(resolve_out_dir(Some(Path::new("flag")), Some("env".into()), &cfg), PathBuf::from("flag"));
    assert_eq!(resolve_out_dir(None, Some("env".into()), &cfg), PathBuf::from("env"));
    assert_eq!(resolve_out_dir(None, None, &cfg), PathBuf::from("from_cfg"));
    assert_eq!(resolve_out_dir(None, None, &RunConfig::default()), PathBuf::from("out"));

    let d = scratch("env");
    let o = bin().env("COMBLAB_OUT", &d).args(["family", "build", "--k", "4,16"]).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(d.join("family.json").exists());
}

#[test]
fn eigen_synth_then_verify() {
    let d = scratch("eigen");
    let o = run(&d, &["eigen", "synth", "--m", "4", "--lambda", "-i", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    check_lines_well_formed(&stdout(&o));
    assert!(d.join("comb_m4_-i.json").exists() || d.join("comb.json").exists());
    let o = run(&d, &["eigen", "verify", "--comb", "comb.json"]);
    assert_eq!(o.status.code(), Some(0));
    // the wrong eigenvalue must fail verification
    let o = run(&d, &["eigen", "verify", "--comb", "comb.json", "--lambda", "1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn construct_outputs_are_deterministic() {
    let a = scratch("det-a");
    let b = scratch("det-b");
    for d in [&a, &b] {
        let o = run(d, &["construct", "favorov", "--k", "4,16"]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
        check_lines_well_formed(&stdout(&o));
    }
    for name in ["favorov_sigma.json", "favorov_Sigma.json", "favorov_certificate.json", "measure.json"] {
        let x = std::fs::read(a.join(name)).unwrap();
        let y = std::fs::read(b.join(name)).unwrap();
        assert_eq!(x, y, "{name} differs between runs");
    }
}

#[test]
fn duality_of_wrong_claim_fails() {
    let d = scratch("dual");
    assert_eq!(run(&d, &["construct", "ks-omega"]).status.code(), Some(0));
    let o = run(&d, &["fourier", "of", "--measure", "measure.json"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(d.join("fourier_samples.csv").exists());
    let o = run(&d, &["fourier", "duality", "--claimed", "i"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("FAIL fourier.duality.max_residual"));
}

#[test]
fn lattice_diagnostics() {
    let d = scratch("diag");
    assert_eq!(run(&d, &["construct", "example", "--which", "lattice", "--n", "300"]).status.code(), Some(0));
    let o = run(&d, &["diag", "growth"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("BoundedExponent"));
    let o = run(&d, &["diag", "apscan", "--lo", "-6", "--hi", "6"]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&d, &["diag", "pdiscrete"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(d.join("pdiscrete.csv").exists());
}

#[test]
fn windowed_measure_has_no_transform_samples() {
    let d = scratch("cov");
    assert_eq!(run(&d, &["construct", "guinand", "--radius", "10"]).status.code(), Some(0));
    let o = run(&d, &["fourier", "of", "--measure", "measure.json"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn capacity_cap_exits_three() {
    let d = scratch("cap");
    let cfg = d.join("c.json");
    std::fs::write(&cfg, r#"{"dft_n_limit":10}"#).unwrap();
    let o = bin().arg("--config").arg(&cfg).arg("--out").arg(&d).args(["eigen", "synth", "--m", "4", "--lambda", "1"]).output().unwrap();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn verify_subset_writes_report() {
    let d = scratch("verify");
    let o = run(&d, &["verify", "all", "--only", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("PASS criterion1"));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join("verify.json")).unwrap()).unwrap();
    assert_eq!(v[0]["number"], 1);
}
