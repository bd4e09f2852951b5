use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use gentree_ffi::*;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(gentree_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn solve_pq_reports_tilt() {
    let (mut t, mut p) = (0.0, 0.0);
    let s = unsafe { gentree_solve_pq(cstr("av123").as_ptr(), &mut t, &mut p) };
    assert_eq!(s, GentreeStatus::Ok);
    assert!((t - 0.5).abs() < 1e-14 && (p - 0.25).abs() < 1e-14);
    let s = unsafe { gentree_solve_pq(cstr("nope").as_ptr(), &mut t, &mut p) };
    assert_eq!(s, GentreeStatus::InvalidArgument);
    assert!(last_error().contains("nope"));
    let s = unsafe { gentree_solve_pq(ptr::null(), &mut t, &mut p) };
    assert_eq!(s, GentreeStatus::NullPointer);
}

#[test]
fn level_counts_and_occurrences() {
    let mut c = 0u64;
    assert_eq!(unsafe { gentree_level_count(cstr("av1423-4123").as_ptr(), 10, &mut c) }, GentreeStatus::Ok);
    assert_eq!(c, 206098);
    let pi = [2u32, 1];
    let sigma = [3u32, 2, 1, 4];
    let mut k = 0usize;
    let s = unsafe { gentree_c_occ(pi.as_ptr(), 2, sigma.as_ptr(), 4, &mut k) };
    assert_eq!(s, GentreeStatus::Ok);
    assert_eq!(k, 2);
    let bad = [1u32, 1];
    let s = unsafe { gentree_c_occ(bad.as_ptr(), 2, sigma.as_ptr(), 4, &mut k) };
    assert_eq!(s, GentreeStatus::InvalidArgument);
}

#[test]
fn pattern_of_jumps() {
    let mut buf = [0u32; 8];
    let mut n = 0usize;
    let fam = cstr("av1423-4123");
    let js = cstr("-2,+1B,+1B,+1T,+1T,-7");
    let s = unsafe { gentree_pat(fam.as_ptr(), js.as_ptr(), buf.as_mut_ptr(), 8, &mut n) };
    assert_eq!(s, GentreeStatus::Ok);
    assert_eq!(&buf[..n], &[4, 2, 1, 5, 6, 3]);
    let s = unsafe { gentree_pat(fam.as_ptr(), js.as_ptr(), buf.as_mut_ptr(), 3, &mut n) };
    assert_eq!(s, GentreeStatus::BufferTooSmall);
    assert_eq!(n, 6);
}

#[test]
fn sampler_lifecycle() {
    let mut h: *mut GentreeSampler = ptr::null_mut();
    let s = unsafe { gentree_sampler_new(cstr("famB").as_ptr(), 3, 5, &mut h) };
    assert_eq!(s, GentreeStatus::Infeasible);
    assert!(h.is_null());
    let s = unsafe { gentree_sampler_new(cstr("av123").as_ptr(), 9, 5, &mut h) };
    assert_eq!(s, GentreeStatus::Ok);
    let mut buf = [0u32; 9];
    let mut n = 0usize;
    for _ in 0..20 {
        assert_eq!(unsafe { gentree_sampler_next(h, buf.as_mut_ptr(), 9, &mut n) }, GentreeStatus::Ok);
        let p = gentree::Permutation::new(buf.to_vec()).unwrap();
        assert!(gentree::FamilyId::Av123.spec().is_member(&p));
    }
    assert_eq!(unsafe { gentree_sampler_next(h, buf.as_mut_ptr(), 4, &mut n) }, GentreeStatus::BufferTooSmall);
    unsafe { gentree_sampler_free(h) };
    unsafe { gentree_sampler_free(ptr::null_mut()) };
}

#[test]
fn pattern_stats_handle() {
    let pi = [2u32, 1];
    let mut h: *mut GentreePatternStats = ptr::null_mut();
    let s = unsafe { gentree_pattern_stats_new(cstr("av123").as_ptr(), pi.as_ptr(), 2, 30, &mut h) };
    assert_eq!(s, GentreeStatus::Ok);
    let mut i = GentreeInterval { lo: 0.0, hi: 0.0 };
    assert_eq!(unsafe { gentree_pattern_stats_get(h, GentreeConstant::Mu, &mut i) }, GentreeStatus::Ok);
    assert!(i.lo <= 0.75 && 0.75 <= i.hi);
    let json = unsafe { gentree_pattern_stats_to_json(h) };
    assert!(!json.is_null());
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    assert!(text.contains("\"gamma2\""));
    unsafe {
        gentree_string_free(json);
        gentree_pattern_stats_free(h);
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(gentree_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

fn static_lib() -> Option<PathBuf> {
    // integration tests live in target/<profile>/deps
    let exe = std::env::current_exe().ok()?;
    let lib = exe.parent()?.parent()?.join("libgentree_ffi.a");
    lib.exists().then_some(lib)
}

#[test]
fn header_compiles_and_links_from_c() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = dir.join("include").join("gentree.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for f in ["gentree_pat", "gentree_sampler_new", "gentree_sampler_free", "gentree_string_free"] {
        assert!(text.contains(f), "{f} missing from header");
    }
    let Some(lib) = static_lib() else {
        eprintln!("static library not found; skipping C link check");
        return;
    };
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("no C compiler; skipping C link check");
        return;
    }
    let exe = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("gentree_smoke");
    let status = Command::new("cc")
        .arg(dir.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C smoke test failed to build");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "C smoke test exited with {:?}", out.status);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().next(), Some("421563"));
    assert_eq!(stdout.lines().nth(1), Some("0.062500"));
}
