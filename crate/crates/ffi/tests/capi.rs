use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use biot_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = biot_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn new_case(problem: &str, n: u32, precond: &str) -> *mut BiotCase {
    let mut h = ptr::null_mut();
    let st = unsafe { biot_case_new(c(problem).as_ptr(), n, 0.01, c(precond).as_ptr(), &mut h) };
    assert_eq!(st, BiotStatus::Ok);
    assert!(!h.is_null());
    h
}

#[test]
fn version_is_nonempty() {
    let v = unsafe { CStr::from_ptr(biot_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn bad_arguments_set_status_and_message() {
    let mut h = ptr::null_mut();
    let st = unsafe { biot_case_new(c("cube").as_ptr(), 4, 0.01, c("bl").as_ptr(), &mut h) };
    assert_eq!(st, BiotStatus::InvalidArgument);
    assert!(h.is_null());
    assert!(!last_error().is_empty());

    let st = unsafe { biot_case_new(ptr::null(), 4, 0.01, c("bl").as_ptr(), &mut h) };
    assert_eq!(st, BiotStatus::NullPointer);

    let st = unsafe { biot_case_new(c("mandel2d").as_ptr(), 4, -1.0, c("bl").as_ptr(), &mut h) };
    assert_eq!(st, BiotStatus::InvalidArgument);

    let st = unsafe { biot_case_set_inexact(ptr::null_mut(), true) };
    assert_eq!(st, BiotStatus::NullPointer);

    let h = new_case("mandel2d", 4, "bl");
    assert_eq!(unsafe { biot_case_set_solver(h, 0.0, 10) }, BiotStatus::InvalidArgument);
    assert_eq!(unsafe { biot_case_set_variant(h, c("sideways").as_ptr()) }, BiotStatus::InvalidArgument);
    unsafe { biot_case_free(h) };
}

#[test]
fn success_clears_previous_error() {
    let mut h = ptr::null_mut();
    unsafe { biot_case_new(c("nope").as_ptr(), 4, 0.01, c("bl").as_ptr(), &mut h) };
    assert!(!biot_last_error_message().is_null());
    let h = new_case("mandel2d", 4, "bl");
    assert!(biot_last_error_message().is_null());
    unsafe { biot_case_free(h) };
}

#[test]
fn run_mandel_case() {
    let h = new_case("mandel2d", 8, "bl");
    assert_eq!(unsafe { biot_case_set_material(h, 0.2, 1e-6) }, BiotStatus::Ok);
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { biot_run(h, &mut r) }, BiotStatus::Ok);
    unsafe {
        assert!(biot_report_converged(r));
        let it = biot_report_iterations(r);
        assert!(it > 0 && it < 100, "{it}");
        assert!(biot_report_relres(r) <= 1e-8);
        let row = biot_report_csv_row(r);
        let s = CStr::from_ptr(row).to_str().unwrap().to_owned();
        biot_string_free(row);
        assert!(s.starts_with("mandel2d,full,bl,false,0.125,0.01,0.2,"), "{s}");
        biot_report_free(r);
        biot_case_free(h);
    }
}

#[test]
fn iteration_cap_reports_not_converged() {
    let h = new_case("mandel2d", 8, "bd");
    unsafe {
        assert_eq!(biot_case_set_solver(h, 1e-14, 2), BiotStatus::Ok);
        let mut r = ptr::null_mut();
        assert_eq!(biot_run(h, &mut r), BiotStatus::NotConverged);
        assert!(!r.is_null());
        assert!(!biot_report_converged(r));
        assert_eq!(biot_report_iterations(r), 2);
        biot_report_free(r);
        biot_case_free(h);
    }
}

#[test]
fn null_handles_are_harmless() {
    unsafe {
        biot_case_free(ptr::null_mut());
        biot_report_free(ptr::null_mut());
        biot_system_free(ptr::null_mut());
        biot_preconditioner_free(ptr::null_mut());
        biot_string_free(ptr::null_mut());
        assert_eq!(biot_report_iterations(ptr::null()), 0);
        assert!(biot_report_relres(ptr::null()).is_nan());
        assert!(biot_report_csv_row(ptr::null()).is_null());
        assert_eq!(biot_system_size(ptr::null()), 0);
    }
}

/// Preconditioned Richardson on the eliminated system with the exact lower
/// preconditioner, driven entirely through the C interface.
#[test]
fn system_and_preconditioner_handles() {
    let h = new_case("mandel2d", 4, "ble");
    unsafe {
        assert_eq!(biot_case_set_variant(h, c("elim").as_ptr()), BiotStatus::Ok);
        let mut s = ptr::null_mut();
        assert_eq!(biot_system_new(h, &mut s), BiotStatus::Ok);
        let n = biot_system_size(s);
        assert!(n > 0);

        let mut b = vec![0.0; n];
        assert_eq!(biot_system_rhs(s, b.as_mut_ptr(), n), BiotStatus::Ok);
        assert!(b.iter().any(|v| *v != 0.0));
        assert_eq!(biot_system_rhs(s, b.as_mut_ptr(), n - 1), BiotStatus::DimensionMismatch);

        let mut wrong = ptr::null_mut();
        assert_eq!(
            biot_preconditioner_new(s, c("bl").as_ptr(), false, &mut wrong),
            BiotStatus::InvalidArgument
        );
        let mut p = ptr::null_mut();
        assert_eq!(biot_preconditioner_new(s, c("ble").as_ptr(), false, &mut p), BiotStatus::Ok);

        let mut x = vec![0.0; n];
        let mut ax = vec![0.0; n];
        let mut z = vec![0.0; n];
        let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
        let b_norm = norm(&b);
        let mut res = b_norm;
        for _ in 0..400 {
            assert_eq!(biot_system_apply(s, x.as_ptr(), ax.as_mut_ptr(), n), BiotStatus::Ok);
            let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
            res = norm(&r);
            if res <= 1e-6 * b_norm {
                break;
            }
            assert_eq!(biot_preconditioner_apply(p, r.as_ptr(), z.as_mut_ptr(), n), BiotStatus::Ok);
            // Damped step keeps the iteration contractive for a
            // nonsymmetric preconditioned operator.
            for (xi, zi) in x.iter_mut().zip(&z) {
                *xi += 0.5 * zi;
            }
        }
        assert!(res <= 1e-6 * b_norm, "residual {res} of {b_norm}");
        assert_eq!(
            biot_preconditioner_apply(p, x.as_ptr(), ptr::null_mut(), n),
            BiotStatus::NullPointer
        );
        biot_preconditioner_free(p);
        biot_system_free(s);
        biot_case_free(h);
    }
}

#[test]
fn mandel_pressure_matches_core() {
    let mut p = 0.0;
    let st = unsafe { biot_mandel_pressure(0.5, 0.01, 0.2, 1e-6, &mut p) };
    assert_eq!(st, BiotStatus::Ok);
    let cfg = biot_core::bench::MandelConfig::default().with_nu(0.2).with_k(1e-6);
    let expect = biot_core::bench::mandel_pressure(0.5, 0.01, &cfg).unwrap();
    assert_eq!(p, expect);
    assert!(p > 0.0);
    assert_eq!(
        unsafe { biot_mandel_pressure(0.5, 0.01, 0.2, 1e-6, ptr::null_mut()) },
        BiotStatus::NullPointer
    );
    assert_ne!(unsafe { biot_mandel_pressure(0.5, 0.01, 0.7, 1e-6, &mut p) }, BiotStatus::Ok);
}

/// The generated header must be valid C and C++.
#[test]
fn header_compiles() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include").join("biot.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "biot_case_new",
        "biot_run",
        "biot_system_apply",
        "biot_preconditioner_apply",
        "biot_mandel_pressure",
        "biot_last_error_message",
        "BIOT_STATUS_NOT_CONVERGED",
    ] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found; skipping syntax check");
        return;
    };
    for lang in ["c", "c++"] {
        let out = Command::new(&cc)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang])
            .arg(&header)
            .output()
            .unwrap();
        assert!(out.status.success(), "{lang}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

fn which_cc() -> Result<String, ()> {
    for cand in ["cc", "clang", "gcc"] {
        if Command::new(cand).arg("--version").output().is_ok_and(|o| o.status.success()) {
            return Ok(cand.to_string());
        }
    }
    Err(())
}
