//! Exercises the C ABI through the exported symbols, the way a foreign
//! binding would.

use std::ffi::{CStr, CString};
use std::ptr;

use soliton_forge_ffi::*;

fn parse(expr: &str) -> *mut SfPhase {
    let c = CString::new(expr).unwrap();
    let mut handle: *mut SfPhase = ptr::null_mut();
    let status = unsafe { sf_phase_parse(c.as_ptr(), &mut handle) };
    assert_eq!(status, SfStatus::Ok, "parse failed: {}", last_error());
    assert!(!handle.is_null());
    handle
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(sf_last_error_message()).to_string_lossy().into_owned() }
}

fn take_string(ptr: *mut std::ffi::c_char) -> String {
    let s = unsafe { CStr::from_ptr(ptr).to_string_lossy().into_owned() };
    unsafe { sf_string_free(ptr) };
    s
}

#[test]
fn parse_operator_classify_free() {
    let phase = parse("two(-1,-1/2,1/2,1)");
    assert_eq!(unsafe { sf_phase_term_count(phase) }, 4);

    let mut is_zero = -1;
    let op = CString::new("T").unwrap();
    let status = unsafe { sf_operator_is_zero(phase, op.as_ptr(), &mut is_zero) };
    assert_eq!(status, SfStatus::Ok);
    assert_eq!(is_zero, 1, "the 2-soliton satisfies T = 0");

    let op = CString::new("heat").unwrap();
    unsafe { sf_operator_is_zero(phase, op.as_ptr(), &mut is_zero) };
    assert_eq!(is_zero, 0);

    let mut json: *mut std::ffi::c_char = ptr::null_mut();
    let status = unsafe { sf_classify_json(phase, &mut json) };
    assert_eq!(status, SfStatus::Ok);
    let report: serde_json::Value = serde_json::from_str(&take_string(json)).unwrap();
    assert_eq!(report["theorem_flags"]["two_soliton"], true);

    unsafe { sf_phase_free(phase) };
}

#[test]
fn phase_to_string_round_trips() {
    let phase = parse("line(1,1,-1/2,1)");
    let mut text: *mut std::ffi::c_char = ptr::null_mut();
    assert_eq!(unsafe { sf_phase_to_string(phase, &mut text) }, SfStatus::Ok);
    let canonical = take_string(text);
    let phase2 = parse(&canonical);
    assert_eq!(unsafe { sf_phase_term_count(phase2) }, 2);
    unsafe {
        sf_phase_free(phase);
        sf_phase_free(phase2);
    }
}

#[test]
fn reconstruct_through_ffi() {
    let phase = parse("resonant(k=[1,2,4],a=[1,1,1])");
    let mut json: *mut std::ffi::c_char = ptr::null_mut();
    let status = unsafe { sf_reconstruct_json(phase, 3, &mut json) };
    assert_eq!(status, SfStatus::Ok, "{}", last_error());
    let v: serde_json::Value = serde_json::from_str(&take_string(json)).unwrap();
    assert_eq!(v["k"], serde_json::json!(["1", "2", "4"]));
    assert_eq!(v["a"], serde_json::json!(["1", "1", "1"]));
    unsafe { sf_phase_free(phase) };

    // failure path: a 2-soliton decomposition is not reconstructible
    let phase = parse("two(-1,-1/3,1/2,5/4)");
    let mut json2: *mut std::ffi::c_char = ptr::null_mut();
    let status = unsafe { sf_reconstruct_json(phase, 3, &mut json2) };
    assert_eq!(status, SfStatus::ComputeError);
    assert!(last_error().contains("entries"));
    unsafe { sf_phase_free(phase) };
}

#[test]
fn kdv_variables_through_ffi() {
    let expr = CString::new("1 + 1 * exp(2*t + 2*x)").unwrap();
    let vars = CString::new("t,x").unwrap();
    let mut handle: *mut SfPhase = ptr::null_mut();
    let status =
        unsafe { sf_phase_parse_with_vars(expr.as_ptr(), vars.as_ptr(), &mut handle) };
    assert_eq!(status, SfStatus::Ok, "{}", last_error());
    let mut is_zero = -1;
    let op = CString::new("kdv_ai").unwrap();
    unsafe { sf_operator_is_zero(handle, op.as_ptr(), &mut is_zero) };
    assert_eq!(is_zero, 1);
    unsafe { sf_phase_free(handle) };
}

#[test]
fn grid_and_residual_through_ffi() {
    let phase = parse("line(1,1,-1/2,1)");
    let dir = tempfile_dir();
    let csv = dir.join("field.csv");
    let csv_c = CString::new(csv.to_str().unwrap()).unwrap();
    let profile = CString::new("log").unwrap();
    let model = CString::new("kp").unwrap();
    let status = unsafe {
        sf_grid_csv(
            phase,
            profile.as_ptr(),
            model.as_ptr(),
            0.0,
            -4.0,
            4.0,
            33,
            -4.0,
            4.0,
            33,
            csv_c.as_ptr(),
        )
    };
    assert_eq!(status, SfStatus::Ok, "{}", last_error());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("x,y,u\n"));
    assert_eq!(text.lines().count(), 1 + 33 * 33);

    let mut max_residual = f64::NAN;
    let mut order = f64::NAN;
    let status = unsafe {
        sf_fd_residual(
            phase,
            profile.as_ptr(),
            model.as_ptr(),
            0.0,
            -4.0,
            4.0,
            33,
            -4.0,
            4.0,
            33,
            0.05,
            &mut max_residual,
            &mut order,
        )
    };
    assert_eq!(status, SfStatus::Ok, "{}", last_error());
    assert!(max_residual < 0.0625, "residual {max_residual}");
    assert!((order - 2.0).abs() < 0.5, "order {order}");

    unsafe { sf_phase_free(phase) };
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn error_paths_set_messages() {
    let mut handle: *mut SfPhase = ptr::null_mut();
    let bad = CString::new("line(1,1").unwrap();
    let status = unsafe { sf_phase_parse(bad.as_ptr(), &mut handle) };
    assert_eq!(status, SfStatus::SyntaxError);
    assert!(last_error().contains("syntax"));

    let degenerate = CString::new("line(1,1,1,1)").unwrap();
    let status = unsafe { sf_phase_parse(degenerate.as_ptr(), &mut handle) };
    assert_eq!(status, SfStatus::SemanticError);

    let status = unsafe { sf_phase_parse(ptr::null(), &mut handle) };
    assert_eq!(status, SfStatus::NullArgument);
}

fn tempfile_dir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("sf-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
