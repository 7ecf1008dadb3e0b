use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use shift_index::operator::examples;
use shift_index_ffi::*;

fn spec_json(s: &shift_index::ShiftOperatorSpec) -> CString {
    CString::new(s.to_json_string()).unwrap()
}

fn last_error() -> String {
    let p = si_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn handle_lifecycle_and_index() {
    let json = spec_json(&examples::variable_d_dx(0.1, 0.7, 2f64.sqrt() - 1.0));
    let mut op = ptr::null_mut();
    unsafe {
        assert_eq!(si_operator_from_json(json.as_ptr(), &mut op), SiStatus::Ok);
        assert!(si_last_error().is_null());
        let mut d = 0;
        assert_eq!(si_operator_dimension(op, &mut d), SiStatus::Ok);
        assert_eq!(d, 1);
        let mut idx = SiIndex::default();
        assert_eq!(si_index(op, 8, &mut idx), SiStatus::Ok);
        assert_eq!((idx.ker, idx.coker, idx.index, idx.converged), (1, 1, 0, 1));
        let mut b = SiIndex::default();
        assert_eq!(si_cylinder_index(op, 8, 8, 1.0, &mut b), SiStatus::Ok);
        assert_eq!(b.index, idx.index);
        let mut e = SiEllipticity::default();
        assert_eq!(si_check_elliptic(op, 8, &mut e), SiStatus::Ok);
        assert_eq!(e.verdict, 1);
        assert!(e.min_sv > 0.1);
        si_operator_free(op);
    }
}

#[test]
fn errors_are_coded_and_described() {
    let mut op = ptr::null_mut();
    unsafe {
        assert_eq!(si_operator_from_json(ptr::null(), &mut op), SiStatus::NullPointer);
        assert!(op.is_null());
        let bad = CString::new("{\"d\": 1}").unwrap();
        assert_eq!(si_operator_from_json(bad.as_ptr(), &mut op), SiStatus::Parse);
        assert!(last_error().contains("parse"));
        let mut idx = SiIndex::default();
        assert_eq!(si_index(ptr::null(), 8, &mut idx), SiStatus::NullPointer);

        let json = spec_json(&examples::variable_d_dx(0.1, 0.7, 0.3));
        assert_eq!(si_operator_from_json(json.as_ptr(), &mut op), SiStatus::Ok);
        assert_eq!(si_index(op, 1, &mut idx), SiStatus::Schema);
        assert!(last_error().contains("K = 1"));
        let missing = CString::new("/nonexistent/spec.json").unwrap();
        let mut other = ptr::null_mut();
        assert_eq!(si_operator_from_file(missing.as_ptr(), &mut other), SiStatus::Io);
        si_operator_free(op);
        si_operator_free(ptr::null_mut());
    }
}

#[test]
fn run_json_returns_report_and_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("d.json");
    std::fs::write(&spec, examples::d_dx(0.3).to_json_string()).unwrap();
    let cfg = CString::new(format!(r#"{{"command": "topo", "spec": {:?}}}"#, spec.to_str().unwrap())).unwrap();
    let mut report = ptr::null_mut();
    let mut code = 0;
    unsafe {
        assert_eq!(si_run_json(cfg.as_ptr(), &mut report, &mut code), SiStatus::Ok);
        assert_eq!(code, 1);
        let text = CStr::from_ptr(report).to_str().unwrap().to_owned();
        si_string_free(report);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!(v["error"].as_str().unwrap().contains("n > 1"));
        let bad = CString::new(r#"{"command": "index", "nope": 1}"#).unwrap();
        assert_eq!(si_run_json(bad.as_ptr(), &mut report, &mut code), SiStatus::Schema);
        assert!(report.is_null());
    }
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(si_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

fn static_lib() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.ancestors()
        .skip(1)
        .take(2)
        .map(|d| d.join("libshift_index_ffi.a"))
        .find(|p| p.exists())
        .expect("static library next to the test binary")
}

#[test]
fn header_compiles_and_links_from_c() {
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    assert!(include.join("shift_index.h").exists());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("probe.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include <string.h>
#include "shift_index.h"

int main(void) {
    const char *json = "{\"d\":1,\"theta\":[0.3],\"terms\":[{\"k\":0,\"coeffs\":[{\"j\":1,\"m\":[0],\"re\":1.0}]}]}";
    SiOperator *op = NULL;
    if (si_operator_from_json(json, &op) != SI_STATUS_OK) return 1;
    SiIndex idx;
    if (si_index(op, 8, &idx) != SI_STATUS_OK) return 2;
    si_operator_free(op);
    if (si_operator_from_json("{", &op) != SI_STATUS_PARSE || si_last_error() == NULL) return 3;
    printf("%zu %zu %lld %s\n", idx.ker, idx.coker, (long long)idx.index, si_version());
    return 0;
}
"#,
    )
    .unwrap();
    let lib = static_lib();
    let exe = dir.path().join("probe");
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C probe failed to build against {lib:?}");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{out:?}");
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), format!("1 1 0 {}", env!("CARGO_PKG_VERSION")));
}
