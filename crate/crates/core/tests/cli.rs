use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use shift_index::operator::examples;
use shift_index::report::validate_report;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_shift-index"))
}

fn write_spec(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn run(args: &[&str]) -> (Output, Value) {
    let out = bin().args(args).output().unwrap();
    let report: Value = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out, report)
}

#[test]
fn equality_on_d_dx_reports_index_zero() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "d.json", &examples::d_dx(2f64.sqrt() - 1.0).to_json_string());
    let (out, r) = run(&["--command", "equality", "--spec", spec.to_str().unwrap(), "--K", "8", "--H", "8", "--grid", "8"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    validate_report(&r).unwrap();
    assert_eq!(r["status"], "conclusive");
    assert_eq!(r["result"]["D"]["index"], 0);
    assert_eq!(r["result"]["B1"]["index"], 0);
    assert_eq!(r["result"]["equal"], true);
    assert!(r["spec"]["spec_hash"].as_str().unwrap().len() >= 16);
}

#[test]
fn ellipticity_at_unit_weight_is_a_conclusive_negative() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "b1.json", &examples::shifted_d_dx(1.0, 2f64.sqrt() - 1.0).to_json_string());
    let (out, r) = run(&["--command", "ellipticity", "--spec", spec.to_str().unwrap(), "--grid", "8"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(r["result"]["is_elliptic"], false);
    assert_eq!(r["result"]["status"], "not_elliptic");
}

#[test]
fn index_commands_refuse_non_elliptic_input() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "b1.json", &examples::shifted_d_dx(1.0, 2f64.sqrt() - 1.0).to_json_string());
    let (out, r) = run(&["--command", "index", "--spec", spec.to_str().unwrap(), "--grid", "8"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(r["error"].as_str().unwrap().contains("not elliptic"));
}

#[test]
fn topo_on_the_circle_cites_the_dimension_requirement() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "d.json", &examples::d_dx(0.3).to_json_string());
    let (out, r) = run(&["--command", "topo", "--spec", spec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(r["status"], "error");
    assert!(r["error"].as_str().unwrap().contains("n > 1"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n > 1"));
}

#[test]
fn empty_corpus_directory_fails() {
    let dir = tempfile::tempdir().unwrap();
    let (out, r) = run(&["--command", "corpus", "--corpus-dir", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(r["status"], "error");
}

#[test]
fn malformed_corpus_entry_errors_only_its_row() {
    let dir = tempfile::tempdir().unwrap();
    write_spec(dir.path(), "a_good.json", &examples::shifted_d_dx(0.3, 2f64.sqrt() - 1.0).to_json_string());
    write_spec(dir.path(), "b_bad.json", r#"{"d": 1, "theta": [0.1], "terms": [{"k": 0, "coeffs": "oops"}]}"#);
    let (out, r) = run(&["--command", "corpus", "--corpus-dir", dir.path().to_str().unwrap(), "--K", "8", "--H", "8", "--grid", "8"]);
    assert_eq!(out.status.code(), Some(1));
    let rows = r["result"]["rows"].as_array().unwrap();
    let bad: Vec<&Value> = rows.iter().filter(|row| row["file"] == "b_bad.json").collect();
    assert_eq!(bad.len(), 1);
    assert_eq!(bad[0]["status"], "error");
    let good: Vec<&Value> = rows.iter().filter(|row| row["file"] == "a_good.json").collect();
    assert_eq!(good.len(), 2);
    assert!(good.iter().all(|row| row["status"] == "pass"), "{good:?}");
    assert_eq!(r["result"]["summary"]["error"], 1);
}

#[test]
fn fixed_order_reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "v.json", &examples::variable_d_dx(0.1, 0.7, 2f64.sqrt() - 1.0).to_json_string());
    let outs: Vec<PathBuf> = (0..2).map(|i| dir.path().join(format!("r{i}.json"))).collect();
    for o in &outs {
        let status = bin()
            .args(["--command", "equality", "--spec", spec.to_str().unwrap(), "--K", "8", "--H", "8", "--grid", "8", "--fixed-order"])
            .args(["--out", o.to_str().unwrap()])
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
    }
    let a = std::fs::read(&outs[0]).unwrap();
    assert_eq!(a, std::fs::read(&outs[1]).unwrap());
    validate_report(&serde_json::from_slice(&a).unwrap()).unwrap();
}

#[test]
fn uniformize_verify_passes_on_a_rational_shift() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "q.json", &examples::shifted_d_dx(0.3, 0.25).to_json_string());
    let (out, r) = run(&["--command", "uniformize-verify", "--spec", spec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{r}");
    assert_eq!(r["result"]["grid_rational"], true);
    assert_eq!(r["result"]["checks"].as_array().unwrap().len(), 10);
}

#[test]
fn toml_specs_and_caps() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(
        dir.path(),
        "d.toml",
        "d = 1\ntheta = [0.25]\n[[terms]]\nk = 0\ncoeffs = [{ j = 1, m = [0], re = 1.0 }]\n",
    );
    let (out, r) = run(&["--command", "index", "--spec", spec.to_str().unwrap(), "--K", "8", "--grid", "8"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(r["result"]["index"], 0);
    let (out, r) = run(&["--command", "index", "--spec", spec.to_str().unwrap(), "--K", "1000"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(r["error"].as_str().unwrap().contains("K = 1000"));
}

#[test]
fn unknown_flags_are_rejected() {
    let out = bin().args(["--command", "index", "--bogus", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}
