use std::ffi::{c_char, c_int, c_void, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use hybridopt_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    let n = unsafe { ho_last_error_message(buf.as_mut_ptr(), buf.len()) };
    let bytes: Vec<u8> = buf[..n.min(255)].iter().map(|&c| c as u8).collect();
    String::from_utf8(bytes).unwrap()
}

fn new_bo(seed: u64) -> *mut HoBoState {
    let lower = [0.0, -1.0];
    let upper = [1.0, 1.0];
    let mut bo = ptr::null_mut();
    assert_eq!(unsafe { ho_bo_new(2, lower.as_ptr(), upper.as_ptr(), seed, &mut bo) }, HoStatus::Ok);
    bo
}

fn f(x: &[f64]) -> f64 {
    -(x[0] - 0.3).powi(2) - (x[1] + 0.2).powi(2)
}

#[test]
fn bo_suggest_observe_best() {
    let bo = new_bo(7);
    let mut x = [0.0; 2];
    let mut y = 0.0;
    assert_eq!(unsafe { ho_bo_best(bo, x.as_mut_ptr(), 2, &mut y) }, HoStatus::NoData);
    for _ in 0..15 {
        assert_eq!(unsafe { ho_bo_suggest(bo, x.as_mut_ptr(), 2) }, HoStatus::Ok);
        assert!((0.0..=1.0).contains(&x[0]) && (-1.0..=1.0).contains(&x[1]));
        assert_eq!(unsafe { ho_bo_observe(bo, x.as_ptr(), 2, f(&x)) }, HoStatus::Ok);
    }
    assert_eq!(unsafe { ho_bo_best(bo, x.as_mut_ptr(), 2, &mut y) }, HoStatus::Ok);
    assert_eq!(y, f(&x));
    assert!(y > -0.05, "{y}");
    unsafe { ho_bo_free(bo) };
}

#[test]
fn bo_serialize_round_trip() {
    let bo = new_bo(3);
    let mut x = [0.0; 2];
    for _ in 0..5 {
        unsafe {
            ho_bo_suggest(bo, x.as_mut_ptr(), 2);
            ho_bo_observe(bo, x.as_ptr(), 2, f(&x));
        }
    }
    let mut len = 0;
    assert_eq!(unsafe { ho_bo_serialize(bo, ptr::null_mut(), 0, &mut len) }, HoStatus::BufferTooSmall);
    let mut buf = vec![0u8; len];
    assert_eq!(unsafe { ho_bo_serialize(bo, buf.as_mut_ptr(), len, &mut len) }, HoStatus::Ok);
    let mut copy = ptr::null_mut();
    assert_eq!(unsafe { ho_bo_deserialize(buf.as_ptr(), len, &mut copy) }, HoStatus::Ok);
    let (mut a, mut b) = ([0.0; 2], [0.0; 2]);
    for _ in 0..3 {
        unsafe {
            ho_bo_suggest(bo, a.as_mut_ptr(), 2);
            ho_bo_suggest(copy, b.as_mut_ptr(), 2);
            ho_bo_observe(bo, a.as_ptr(), 2, f(&a));
            ho_bo_observe(copy, b.as_ptr(), 2, f(&b));
        }
        assert_eq!(a, b);
    }
    let garbage = b"not json";
    let mut bad = ptr::null_mut();
    assert_eq!(unsafe { ho_bo_deserialize(garbage.as_ptr(), garbage.len(), &mut bad) }, HoStatus::Serialization);
    unsafe {
        ho_bo_free(bo);
        ho_bo_free(copy);
    }
}

#[test]
fn errors_are_reported() {
    let lower = [1.0];
    let upper = [0.0];
    let mut bo = ptr::null_mut();
    assert_eq!(unsafe { ho_bo_new(1, lower.as_ptr(), upper.as_ptr(), 0, &mut bo) }, HoStatus::InvalidArgument);
    assert!(last_error().contains("lower < upper"), "{}", last_error());
    assert_eq!(unsafe { ho_bo_suggest(ptr::null_mut(), ptr::null_mut(), 0) }, HoStatus::NullPointer);

    let bo = new_bo(0);
    let x = [5.0, 0.0];
    assert_eq!(unsafe { ho_bo_observe(bo, x.as_ptr(), 2, 1.0) }, HoStatus::InvalidArgument);
    assert_eq!(unsafe { ho_bo_observe(bo, x.as_ptr(), 3, 1.0) }, HoStatus::InvalidArgument);
    unsafe { ho_bo_free(bo) };

    let name = CString::new("nope").unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { ho_hybrid_new_synthetic(name.as_ptr(), 3, 0.1, 0, &mut h) }, HoStatus::UnknownFunction);
    assert!(last_error().contains("shekel"));

    // truncation keeps the NUL terminator
    let mut small = [1 as c_char; 4];
    let full = unsafe { ho_last_error_message(small.as_mut_ptr(), small.len()) };
    assert!(full > 3);
    assert_eq!(small[3], 0);
}

#[test]
fn hybrid_on_synthetic() {
    let name = CString::new("composition").unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { ho_hybrid_new_synthetic(name.as_ptr(), 3, 0.1, 1, &mut h) }, HoStatus::Ok);
    let (mut nd, mut nc) = (0, 0);
    unsafe { ho_hybrid_dims(h, &mut nd, &mut nc) };
    assert_eq!((nd, nc), (2, 1));
    let mut best = f64::NEG_INFINITY;
    for _ in 0..40 {
        let prev = best;
        assert_eq!(unsafe { ho_hybrid_step(h, &mut best) }, HoStatus::Ok);
        assert!(best >= prev);
    }
    let (mut d, mut c, mut v) = ([0.0; 2], [0.0; 1], 0.0);
    assert_eq!(unsafe { ho_hybrid_best(h, d.as_mut_ptr(), 2, c.as_mut_ptr(), 1, &mut v) }, HoStatus::Ok);
    assert_eq!(v, best);
    let (mut iters, mut evals) = (0, 0);
    unsafe { ho_hybrid_counts(h, &mut iters, &mut evals) };
    assert_eq!((iters, evals), (40, 120));
    unsafe { ho_hybrid_free(h) };
}

struct Calls(usize);

unsafe extern "C" fn objective(
    user_data: *mut c_void,
    discrete: *const f64,
    nd: usize,
    continuous: *const f64,
    nc: usize,
    value: *mut f64,
) -> c_int {
    let calls = &mut *(user_data as *mut Calls);
    calls.0 += 1;
    let d = std::slice::from_raw_parts(discrete, nd);
    let c = std::slice::from_raw_parts(continuous, nc);
    if c[0].is_nan() {
        return 1;
    }
    *value = d[0] - (c[0] - 0.5).powi(2);
    0
}

unsafe extern "C" fn failing(_: *mut c_void, _: *const f64, _: usize, _: *const f64, _: usize, _: *mut f64) -> c_int {
    3
}

#[test]
fn hybrid_with_callback() {
    let sizes = [2usize];
    let domains = [0.0, 1.0];
    let (lower, upper) = ([0.0], [1.0]);
    let mut calls = Calls(0);
    let mut h = ptr::null_mut();
    let status = unsafe {
        ho_hybrid_new_callback(
            1,
            sizes.as_ptr(),
            domains.as_ptr(),
            1,
            lower.as_ptr(),
            upper.as_ptr(),
            Some(objective),
            &mut calls as *mut Calls as *mut c_void,
            2,
            0.1,
            5,
            &mut h,
        )
    };
    assert_eq!(status, HoStatus::Ok);
    let mut best = 0.0;
    for _ in 0..60 {
        assert_eq!(unsafe { ho_hybrid_step(h, &mut best) }, HoStatus::Ok);
    }
    unsafe { ho_hybrid_free(h) };
    assert_eq!(calls.0, 120);
    assert!(best > 0.99, "{best}");

    let mut h = ptr::null_mut();
    let status = unsafe {
        ho_hybrid_new_callback(
            1,
            sizes.as_ptr(),
            domains.as_ptr(),
            1,
            lower.as_ptr(),
            upper.as_ptr(),
            Some(failing),
            ptr::null_mut(),
            2,
            0.1,
            5,
            &mut h,
        )
    };
    assert_eq!(status, HoStatus::Ok);
    assert_eq!(unsafe { ho_hybrid_step(h, ptr::null_mut()) }, HoStatus::Evaluation);
    assert!(last_error().contains("callback returned 3"), "{}", last_error());
    unsafe { ho_hybrid_free(h) };
}

#[test]
fn header_is_valid_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/hybridopt.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for sym in ["ho_bo_new", "ho_bo_serialize", "ho_hybrid_new_callback", "ho_hybrid_step", "ho_last_error_message"] {
        assert!(text.contains(sym), "{sym} missing from header");
    }
    // syntax-check with a C compiler when one is installed
    if let Ok(out) = Command::new("cc").args(["-fsyntax-only", "-x", "c"]).arg(&header).output() {
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn c_program_links_and_runs() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    // target/<profile>/deps/<test binary>
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(Path::parent).unwrap();
    let lib = profile_dir.join("libhybridopt_ffi.a");
    if Command::new("cc").arg("--version").output().is_err() || !lib.exists() {
        eprintln!("skipping: no C compiler or static library");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("demo");
    let out = Command::new("cc")
        .arg(manifest.join("examples/demo.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let stdout = String::from_utf8(run.stdout).unwrap();
    assert!(stdout.starts_with("best 1.99") || stdout.starts_with("best 2.000"), "{stdout}");
}
