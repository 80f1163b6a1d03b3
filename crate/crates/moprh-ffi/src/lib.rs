//! C ABI for the verification runner: parse an experiment config (JSON), run
//! the suites, and inspect the resulting report through an opaque handle.
//!
//! Every entry point is panic-safe and returns a `MoprhStatus` code; strings
//! returned through out-pointers are owned by the library and must be released
//! with `moprh_string_free`.

use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use moprh::config::{preset, ExperimentConfig};
use moprh::report::Report;
use moprh::suites::run_config;

/// Error codes returned by every fallible entry point.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum MoprhStatus {
    Ok = 0,
    /// null pointer, non-UTF-8 string, or index out of range
    InvalidArgument = 1,
    /// config rejected (unknown fields, bad dimensions, unknown preset, ...)
    Config = 2,
    /// the numerical run itself failed (regularity, decay, singular pivot, ...)
    Compute = 3,
    /// writing report files failed
    Io = 4,
    /// internal panic caught at the boundary
    Internal = 5,
}

/// Opaque run result: the report plus the config it was produced from.
pub struct MoprhReport {
    report: Report,
    config_json: String,
}

fn c_str<'a>(p: *const c_char) -> Result<&'a str, MoprhStatus> {
    if p.is_null() {
        return Err(MoprhStatus::InvalidArgument);
    }
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| MoprhStatus::InvalidArgument)
}

fn guard<F: FnOnce() -> MoprhStatus>(f: F) -> MoprhStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(MoprhStatus::Internal)
}

fn run(cfg: &ExperimentConfig, jobs: usize, out: *mut *mut MoprhReport) -> MoprhStatus {
    match run_config(cfg, jobs.max(1)) {
        Ok(report) => {
            let handle = Box::new(MoprhReport {
                report,
                config_json: cfg.to_json(),
            });
            unsafe { *out = Box::into_raw(handle) };
            MoprhStatus::Ok
        }
        Err(_) => MoprhStatus::Compute,
    }
}

/// Run the verification suites for a JSON experiment config.
/// On success `*out` owns the report; release it with `moprh_report_free`.
#[no_mangle]
pub extern "C" fn moprh_run_json(
    config_json: *const c_char,
    jobs: c_int,
    out: *mut *mut MoprhReport,
) -> MoprhStatus {
    guard(|| {
        if out.is_null() {
            return MoprhStatus::InvalidArgument;
        }
        let text = match c_str(config_json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let cfg = match ExperimentConfig::from_json(text) {
            Ok(c) => c,
            Err(_) => return MoprhStatus::Config,
        };
        run(&cfg, jobs.max(1) as usize, out)
    })
}

/// Run a builtin preset (see `moprh_preset_config_json` for the config it expands to).
#[no_mangle]
pub extern "C" fn moprh_run_preset(
    name: *const c_char,
    jobs: c_int,
    out: *mut *mut MoprhReport,
) -> MoprhStatus {
    guard(|| {
        if out.is_null() {
            return MoprhStatus::InvalidArgument;
        }
        let name = match c_str(name) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let cfg = match preset(name) {
            Some(c) => c,
            None => return MoprhStatus::Config,
        };
        run(&cfg, jobs.max(1) as usize, out)
    })
}

/// Expand a builtin preset into its JSON config (caller frees with `moprh_string_free`).
#[no_mangle]
pub extern "C" fn moprh_preset_config_json(
    name: *const c_char,
    out: *mut *mut c_char,
) -> MoprhStatus {
    guard(|| {
        if out.is_null() {
            return MoprhStatus::InvalidArgument;
        }
        let name = match c_str(name) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match preset(name) {
            Some(cfg) => {
                let s = CString::new(cfg.to_json()).expect("no interior NUL in config JSON");
                unsafe { *out = s.into_raw() };
                MoprhStatus::Ok
            }
            None => MoprhStatus::Config,
        }
    })
}

/// 1 if every gating identity passed, 0 otherwise, -1 on a null handle.
#[no_mangle]
pub extern "C" fn moprh_report_all_pass(report: *const MoprhReport) -> c_int {
    if report.is_null() {
        return -1;
    }
    let r = unsafe { &*report };
    r.report.all_pass() as c_int
}

/// Number of identity records in the report (0 on a null handle).
#[no_mangle]
pub extern "C" fn moprh_report_record_count(report: *const MoprhReport) -> usize {
    if report.is_null() {
        return 0;
    }
    unsafe { &*report }.report.records.len()
}

/// Residual and pass flag of record `index`; either out-pointer may be null.
#[no_mangle]
pub extern "C" fn moprh_report_record(
    report: *const MoprhReport,
    index: usize,
    residual: *mut f64,
    pass: *mut c_int,
) -> MoprhStatus {
    if report.is_null() {
        return MoprhStatus::InvalidArgument;
    }
    let r = unsafe { &*report };
    match r.report.records.get(index) {
        Some(rec) => {
            if !residual.is_null() {
                unsafe { *residual = rec.residual };
            }
            if !pass.is_null() {
                unsafe { *pass = rec.pass as c_int };
            }
            MoprhStatus::Ok
        }
        None => MoprhStatus::InvalidArgument,
    }
}

/// Full report as JSON (caller frees with `moprh_string_free`).
#[no_mangle]
pub extern "C" fn moprh_report_to_json(
    report: *const MoprhReport,
    out: *mut *mut c_char,
) -> MoprhStatus {
    guard(|| {
        if report.is_null() || out.is_null() {
            return MoprhStatus::InvalidArgument;
        }
        let r = unsafe { &*report };
        let json = r.report.to_json(&r.config_json);
        let s = CString::new(json).expect("no interior NUL in report JSON");
        unsafe { *out = s.into_raw() };
        MoprhStatus::Ok
    })
}

/// Write report.json plus the CSV tables into `dir` (created if missing).
#[no_mangle]
pub extern "C" fn moprh_report_write_files(
    report: *const MoprhReport,
    dir: *const c_char,
) -> MoprhStatus {
    guard(|| {
        if report.is_null() {
            return MoprhStatus::InvalidArgument;
        }
        let dir = match c_str(dir) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let r = unsafe { &*report };
        match r.report.write_files(std::path::Path::new(dir), &r.config_json) {
            Ok(()) => MoprhStatus::Ok,
            Err(_) => MoprhStatus::Io,
        }
    })
}

/// Release a report handle. Null is a no-op.
#[no_mangle]
pub extern "C" fn moprh_report_free(report: *mut MoprhReport) {
    if !report.is_null() {
        drop(unsafe { Box::from_raw(report) });
    }
}

/// Release a string returned by this library. Null is a no-op.
#[no_mangle]
pub extern "C" fn moprh_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Static library version string; do not free.
#[no_mangle]
pub extern "C" fn moprh_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;
    use std::ptr;

    fn run_preset(name: &str) -> *mut MoprhReport {
        let name = CString::new(name).unwrap();
        let mut out: *mut MoprhReport = ptr::null_mut();
        let st = moprh_run_preset(name.as_ptr(), 1, &mut out);
        assert!(st == MoprhStatus::Ok);
        assert!(!out.is_null());
        out
    }

    #[test]
    fn preset_round_trip_and_records() {
        let h = run_preset("altdpi-scalar-magnus");
        assert_eq!(moprh_report_all_pass(h), 1);
        let count = moprh_report_record_count(h);
        assert!(count > 0);
        let mut residual = f64::NAN;
        let mut pass = -1;
        assert!(moprh_report_record(h, 0, &mut residual, &mut pass) == MoprhStatus::Ok);
        assert!(residual.is_finite() && pass == 1);
        assert!(moprh_report_record(h, count, &mut residual, &mut pass)
            == MoprhStatus::InvalidArgument);

        let mut json: *mut c_char = ptr::null_mut();
        assert!(moprh_report_to_json(h, &mut json) == MoprhStatus::Ok);
        let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
        assert!(text.contains("\"all_pass\": true"));
        moprh_string_free(json);
        moprh_report_free(h);

        // same run through the JSON entry point is byte-identical
        let name = CString::new("altdpi-scalar-magnus").unwrap();
        let mut cfg: *mut c_char = ptr::null_mut();
        assert!(moprh_preset_config_json(name.as_ptr(), &mut cfg) == MoprhStatus::Ok);
        let mut h2: *mut MoprhReport = ptr::null_mut();
        assert!(moprh_run_json(cfg, 1, &mut h2) == MoprhStatus::Ok);
        let mut json2: *mut c_char = ptr::null_mut();
        assert!(moprh_report_to_json(h2, &mut json2) == MoprhStatus::Ok);
        assert_eq!(text, unsafe { CStr::from_ptr(json2) }.to_str().unwrap());
        moprh_string_free(json2);
        moprh_string_free(cfg);
        moprh_report_free(h2);
    }

    #[test]
    fn error_codes() {
        let mut out: *mut MoprhReport = ptr::null_mut();
        assert!(moprh_run_json(ptr::null(), 1, &mut out) == MoprhStatus::InvalidArgument);
        let bad = CString::new("{\"nope\": 1}").unwrap();
        assert!(moprh_run_json(bad.as_ptr(), 1, &mut out) == MoprhStatus::Config);
        let missing = CString::new("no-such-preset").unwrap();
        assert!(moprh_run_preset(missing.as_ptr(), 1, &mut out) == MoprhStatus::Config);
        assert!(out.is_null());
        assert_eq!(moprh_report_all_pass(ptr::null()), -1);
        moprh_report_free(ptr::null_mut());
        moprh_string_free(ptr::null_mut());
    }

    #[test]
    fn write_files_roundtrip() {
        let h = run_preset("altdpi-scalar-magnus");
        let tmp = std::env::temp_dir().join("moprh-ffi-test-out");
        let dir = CString::new(tmp.to_str().unwrap()).unwrap();
        assert!(moprh_report_write_files(h, dir.as_ptr()) == MoprhStatus::Ok);
        assert!(tmp.join("report.json").exists());
        std::fs::remove_dir_all(&tmp).ok();
        moprh_report_free(h);
    }
}
