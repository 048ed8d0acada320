use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use punctlab_ffi::*;

fn c(z: f64, w: f64) -> PlComplex {
    PlComplex { re: z, im: w }
}

fn parse(text: &str) -> *mut PlExpr {
    let t = CString::new(text).unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { pl_expr_parse(t.as_ptr(), &mut h) }, PlStatus::Ok);
    h
}

fn last_error() -> String {
    let p = pl_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn evaluation_and_derivative() {
    let f = parse("k*z");
    let mut v = PlSpherePoint { infinite: true, value: c(0.0, 0.0) };
    assert_eq!(unsafe { pl_expr_eval(f, c(2.0, 0.0), true, 3, &mut v) }, PlStatus::Ok);
    assert!(!v.infinite && v.value == c(6.0, 0.0));
    assert_eq!(unsafe { pl_expr_eval(f, c(2.0, 0.0), false, 0, &mut v) }, PlStatus::MissingParameter);
    assert!(last_error().contains('k'));
    let mut s = 0.0;
    assert_eq!(unsafe { pl_expr_spherical_derivative(f, c(0.0, 0.0), true, 10, &mut s) }, PlStatus::Ok);
    assert_eq!(s, 20.0);
    unsafe { pl_expr_free(f) };

    let g = parse("1/z");
    assert_eq!(unsafe { pl_expr_eval(g, c(0.0, 0.0), false, 0, &mut v) }, PlStatus::Ok);
    assert!(v.infinite);
    unsafe { pl_expr_free(g) };
}

#[test]
fn errors_and_null_handles() {
    let t = CString::new("sqrt(z)").unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { pl_expr_parse(t.as_ptr(), &mut h) }, PlStatus::UnknownIdentifier);
    assert!(h.is_null());
    assert!(last_error().contains("sqrt"));
    assert_eq!(unsafe { pl_expr_parse(ptr::null(), &mut h) }, PlStatus::NullPointer);
    let mut out = 0.0;
    assert_eq!(unsafe { pl_diam_circle_image(ptr::null(), 0.1, 64, &mut out) }, PlStatus::NullPointer);
    assert_eq!(unsafe { pl_punctured_circle_length(2.0, &mut out) }, PlStatus::OutsideDomain);
    unsafe {
        pl_expr_free(ptr::null_mut());
        pl_string_free(ptr::null_mut());
    }
}

#[test]
fn metrics() {
    let inf = PlSpherePoint { infinite: true, value: c(0.0, 0.0) };
    let zero = PlSpherePoint { infinite: false, value: c(0.0, 0.0) };
    assert_eq!(pl_chordal(zero, inf), 2.0);
    let mut d = 0.0;
    assert_eq!(unsafe { pl_poincare_distance(c(0.0, 0.0), 1.0, c(0.0, 0.0), c(0.5, 0.0), &mut d) }, PlStatus::Ok);
    assert!((d - 0.5f64.atanh()).abs() < 1e-15);
    let t = (-2.0 * std::f64::consts::PI).exp();
    assert_eq!(unsafe { pl_punctured_distance(c(t, 0.0), c(-t, 0.0), &mut d) }, PlStatus::Ok);
    assert!((d - 1.125f64.acosh()).abs() < 1e-9);
}

#[test]
fn analyses_return_json() {
    let f = parse("exp(1/z)");
    let mut d = 0.0;
    assert_eq!(unsafe { pl_diam_circle_image(f, 1e-3, 1024, &mut d) }, PlStatus::Ok);
    assert!(d > 1.99);
    let radii = [1e-1, 1e-2, 1e-3, 1e-4];
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { pl_lv_json(f, radii.as_ptr(), radii.len(), &mut json) }, PlStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(unsafe { CStr::from_ptr(json) }.to_str().unwrap()).unwrap();
    assert_eq!(v["status"], "Witness");
    unsafe { pl_string_free(json) };

    let mut l = 0.0;
    let k = parse("k*z");
    assert_eq!(unsafe { pl_lipschitz_estimate(k, true, 10, c(0.0, 0.0), 0.5, 400, 0, &mut l) }, PlStatus::Ok);
    assert!((l - 10.0).abs() < 1e-6, "{l}");
    let ks = [1i64, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024, 2048, 4096];
    assert_eq!(unsafe { pl_marty_json(k, c(0.0, 0.0), 0.5, ks.as_ptr(), ks.len(), 0, &mut json) }, PlStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(unsafe { CStr::from_ptr(json) }.to_str().unwrap()).unwrap();
    assert_eq!(v["label"], "NonNormalSuspected");
    unsafe {
        pl_string_free(json);
        pl_expr_free(k);
        pl_expr_free(f);
    }
}

/// The directory holding the library artifacts of this build.
fn artifact_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_the_static_library() {
    let dir = artifact_dir();
    let lib = dir.join("libpunctlab_ffi.a");
    assert!(lib.exists(), "missing {}", lib.display());
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let tmp = tempfile::tempdir().unwrap();
    let exe = tmp.path().join("smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler available");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
