//! C ABI for the soliton-forge toolkit.
//!
//! Conventions: every fallible call returns an [`SfStatus`] code and writes
//! its result through an out-parameter; `SfPhase` is an opaque handle that
//! must be released with `sf_phase_free`; strings returned through
//! `char**` are NUL-terminated, malloc'd by Rust and released with
//! `sf_string_free`. The most recent error text per thread is available
//! via `sf_last_error_message` (valid until the next failing call on that
//! thread).
//!
//! The corresponding header is `include/soliton_forge.h`, maintained by
//! hand; a unit test checks that every exported symbol is declared there.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use soliton_forge::cones;
use soliton_forge::dsl;
use soliton_forge::expalg::VarSet;
use soliton_forge::numeric::{self, AxisRange, Grid};
use soliton_forge::operators::{self, Model, Profile};
use soliton_forge::selftest;

/// Status codes of the C API.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SfStatus {
    Ok = 0,
    SyntaxError = 1,
    SemanticError = 2,
    ComputeError = 3,
    NullArgument = 4,
    InvalidUtf8 = 5,
    Panic = 6,
}

/// Opaque phase handle: a lowered expression (exact polynomial plus the
/// optional constructor record).
pub struct SfPhase {
    lowered: dsl::Lowered,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let cleaned = msg.replace('\0', " ");
    LAST_ERROR.with(|e| {
        *e.borrow_mut() = CString::new(cleaned).unwrap_or_default();
    });
}

fn fail(status: SfStatus, msg: &str) -> SfStatus {
    set_error(msg);
    status
}

/// Pointer to the current thread's last error message (empty if none).
/// Valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, SfStatus> {
    if ptr.is_null() {
        return Err(fail(SfStatus::NullArgument, "null string argument"));
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| fail(SfStatus::InvalidUtf8, "invalid UTF-8"))
}

fn give_string(text: String, out: *mut *mut c_char) -> SfStatus {
    if out.is_null() {
        return fail(SfStatus::NullArgument, "null output pointer");
    }
    match CString::new(text) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            SfStatus::Ok
        }
        Err(_) => fail(SfStatus::ComputeError, "interior NUL in output"),
    }
}

fn guard(f: impl FnOnce() -> SfStatus) -> SfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(SfStatus::Panic, "internal panic"),
    }
}

/// Parses a phase expression over `(t, x, y)`.
///
/// # Safety
/// `expr` must be a valid NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sf_phase_parse(
    expr: *const c_char,
    out: *mut *mut SfPhase,
) -> SfStatus {
    sf_phase_parse_with_vars(expr, std::ptr::null(), out)
}

/// Parses a phase expression with an explicit comma-separated variable set
/// (pass NULL for the default `t,x,y`). Non-KP sets accept only the
/// canonical polynomial form.
///
/// # Safety
/// `expr`/`vars` must be valid NUL-terminated strings (vars may be NULL);
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sf_phase_parse_with_vars(
    expr: *const c_char,
    vars: *const c_char,
    out: *mut *mut SfPhase,
) -> SfStatus {
    guard(|| {
        if out.is_null() {
            return fail(SfStatus::NullArgument, "null output pointer");
        }
        let text = match read_str(expr) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let varset = if vars.is_null() {
            VarSet::kp()
        } else {
            let names: Vec<String> = match read_str(vars) {
                Ok(v) => v.split(',').map(str::to_string).collect(),
                Err(s) => return s,
            };
            match VarSet::new(&names) {
                Ok(v) => v,
                Err(e) => return fail(SfStatus::SemanticError, &e.to_string()),
            }
        };
        let ast = match dsl::parse_with_vars(text, &varset) {
            Ok(a) => a,
            Err(e @ dsl::DslError::Syntax { .. }) => {
                return fail(SfStatus::SyntaxError, &e.to_string())
            }
            Err(e) => return fail(SfStatus::SemanticError, &e.to_string()),
        };
        match dsl::lower(&ast) {
            Ok(lowered) => {
                *out = Box::into_raw(Box::new(SfPhase { lowered }));
                SfStatus::Ok
            }
            Err(e) => fail(SfStatus::SemanticError, &e.to_string()),
        }
    })
}

/// Releases a phase handle. NULL is ignored.
///
/// # Safety
/// `phase` must come from `sf_phase_parse*` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sf_phase_free(phase: *mut SfPhase) {
    if !phase.is_null() {
        drop(Box::from_raw(phase));
    }
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from an `sf_*` out-parameter and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Number of normal-form terms of the phase polynomial, or -1 on NULL.
///
/// # Safety
/// `phase` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn sf_phase_term_count(phase: *const SfPhase) -> i32 {
    if phase.is_null() {
        return -1;
    }
    (*phase).lowered.theta.term_count() as i32
}

/// Canonical textual form of the phase polynomial.
///
/// # Safety
/// `phase` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sf_phase_to_string(
    phase: *const SfPhase,
    out: *mut *mut c_char,
) -> SfStatus {
    guard(|| {
        if phase.is_null() {
            return fail(SfStatus::NullArgument, "null phase");
        }
        give_string((*phase).lowered.theta.to_string(), out)
    })
}

/// Applies a named operator (CLI names: heat, airy, wx, wy, T, kp_residual,
/// kdv_ai, ..., mzk_lambda) and reports whether every produced functional is
/// exactly zero (1) or not (0).
///
/// # Safety
/// `phase` must be a live handle; `op` a valid string; `out_is_zero` writable.
#[no_mangle]
pub unsafe extern "C" fn sf_operator_is_zero(
    phase: *const SfPhase,
    op: *const c_char,
    out_is_zero: *mut i32,
) -> SfStatus {
    guard(|| {
        if phase.is_null() || out_is_zero.is_null() {
            return fail(SfStatus::NullArgument, "null argument");
        }
        let name = match read_str(op) {
            Ok(n) => n,
            Err(s) => return s,
        };
        match operators::apply_named(&(*phase).lowered.theta, name) {
            Ok(results) => {
                let zero = results.iter().all(|(_, r)| r.is_zero());
                *out_is_zero = i32::from(zero);
                SfStatus::Ok
            }
            Err(e) => fail(SfStatus::ComputeError, &e.to_string()),
        }
    })
}

/// Classification report as a JSON string.
///
/// # Safety
/// `phase` must be a live handle; `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn sf_classify_json(
    phase: *const SfPhase,
    out_json: *mut *mut c_char,
) -> SfStatus {
    guard(|| {
        if phase.is_null() {
            return fail(SfStatus::NullArgument, "null phase");
        }
        match cones::classify(&(*phase).lowered.theta) {
            Ok(report) => match serde_json::to_string(&report) {
                Ok(json) => give_string(json, out_json),
                Err(e) => fail(SfStatus::ComputeError, &e.to_string()),
            },
            Err(e) => fail(SfStatus::ComputeError, &e.to_string()),
        }
    })
}

/// Resonant reconstruction from the cleared y-Wronskian with `m` spectral
/// parameters; returns `{"k": [...], "a": [...]}` on success.
///
/// # Safety
/// `phase` must be a live handle; `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn sf_reconstruct_json(
    phase: *const SfPhase,
    m: u32,
    out_json: *mut *mut c_char,
) -> SfStatus {
    guard(|| {
        if phase.is_null() {
            return fail(SfStatus::NullArgument, "null phase");
        }
        match cones::reconstruct_from_theta(&(*phase).lowered.theta, m as usize) {
            Ok(params) => {
                let k: Vec<String> = params.k.iter().map(|q| q.to_string()).collect();
                let a: Vec<String> = params.a.iter().map(|q| q.to_string()).collect();
                match serde_json::to_string(&serde_json::json!({ "k": k, "a": a })) {
                    Ok(json) => give_string(json, out_json),
                    Err(e) => fail(SfStatus::ComputeError, &e.to_string()),
                }
            }
            Err(e) => fail(SfStatus::ComputeError, &e.to_string()),
        }
    })
}

fn parse_profile(profile: &str) -> Result<Profile, SfStatus> {
    match profile {
        "log" => Ok(Profile::Log),
        "arctan2" => Ok(Profile::Arctan2),
        other => Err(fail(SfStatus::SemanticError, &format!("unknown profile `{other}`"))),
    }
}

fn parse_model(model: &str) -> Result<Model, SfStatus> {
    match model {
        "kp" => Ok(Model::Kp),
        "kdv" => Ok(Model::Kdv),
        "mkdv" => Ok(Model::Mkdv),
        other => Err(fail(SfStatus::SemanticError, &format!("unknown model `{other}`"))),
    }
}

fn build_grid(
    t0: f64,
    x_min: f64,
    x_max: f64,
    x_count: u32,
    y_min: f64,
    y_max: f64,
    y_count: u32,
) -> Result<Grid, SfStatus> {
    let x = AxisRange::new(x_min, x_max, x_count as usize)
        .map_err(|e| fail(SfStatus::SemanticError, &e.to_string()))?;
    let y = AxisRange::new(y_min, y_max, y_count as usize)
        .map_err(|e| fail(SfStatus::SemanticError, &e.to_string()))?;
    Ok(Grid::new(t0, x, y))
}

/// Samples `u` over a grid and writes the CSV to `path`.
///
/// # Safety
/// `phase`, `profile`, `model`, `path` must be valid; see header.
#[no_mangle]
pub unsafe extern "C" fn sf_grid_csv(
    phase: *const SfPhase,
    profile: *const c_char,
    model: *const c_char,
    t0: f64,
    x_min: f64,
    x_max: f64,
    x_count: u32,
    y_min: f64,
    y_max: f64,
    y_count: u32,
    path: *const c_char,
) -> SfStatus {
    guard(|| {
        if phase.is_null() {
            return fail(SfStatus::NullArgument, "null phase");
        }
        let profile = match read_str(profile).and_then(parse_profile) {
            Ok(p) => p,
            Err(s) => return s,
        };
        let model = match read_str(model).and_then(parse_model) {
            Ok(m) => m,
            Err(s) => return s,
        };
        let grid = match build_grid(t0, x_min, x_max, x_count, y_min, y_max, y_count) {
            Ok(g) => g,
            Err(s) => return s,
        };
        let path_str = match read_str(path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        match numeric::eval_field(&(*phase).lowered.theta, profile, &grid, model)
            .and_then(|sample| numeric::export_csv(&sample, Path::new(path_str)))
        {
            Ok(()) => SfStatus::Ok,
            Err(e) => fail(SfStatus::ComputeError, &e.to_string()),
        }
    })
}

/// Finite-difference residual of the model PDE at steps `h` and `h/2`;
/// writes the maximum absolute residual and the empirical order.
///
/// # Safety
/// Pointers must be valid; see header.
#[no_mangle]
pub unsafe extern "C" fn sf_fd_residual(
    phase: *const SfPhase,
    profile: *const c_char,
    model: *const c_char,
    t0: f64,
    x_min: f64,
    x_max: f64,
    x_count: u32,
    y_min: f64,
    y_max: f64,
    y_count: u32,
    h: f64,
    out_max_residual: *mut f64,
    out_order: *mut f64,
) -> SfStatus {
    guard(|| {
        if phase.is_null() || out_max_residual.is_null() || out_order.is_null() {
            return fail(SfStatus::NullArgument, "null argument");
        }
        let profile = match read_str(profile).and_then(parse_profile) {
            Ok(p) => p,
            Err(s) => return s,
        };
        let model = match read_str(model).and_then(parse_model) {
            Ok(m) => m,
            Err(s) => return s,
        };
        let grid = match build_grid(t0, x_min, x_max, x_count, y_min, y_max, y_count) {
            Ok(g) => g,
            Err(s) => return s,
        };
        match numeric::fd_residual(&(*phase).lowered.theta, profile, model, &grid, h) {
            Ok(report) => {
                *out_max_residual = report.max_abs_residual;
                *out_order = report.order;
                SfStatus::Ok
            }
            Err(e) => fail(SfStatus::ComputeError, &e.to_string()),
        }
    })
}

/// Runs the full verification suite; `out_all_pass` receives 1/0 and
/// `out_json` the per-criterion report array.
///
/// # Safety
/// `out_all_pass` and `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sf_selftest(
    seed: u64,
    out_all_pass: *mut i32,
    out_json: *mut *mut c_char,
) -> SfStatus {
    guard(|| {
        if out_all_pass.is_null() {
            return fail(SfStatus::NullArgument, "null output pointer");
        }
        let results = selftest::run_all(seed);
        *out_all_pass = i32::from(results.iter().all(|r| r.pass));
        match serde_json::to_string(&results) {
            Ok(json) => give_string(json, out_json),
            Err(e) => fail(SfStatus::ComputeError, &e.to_string()),
        }
    })
}
