use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use bpb_ffi::*;

fn last_error() -> String {
    let p = bpb_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn instance(family: &str, n: usize, seed: u64) -> *mut BpbInstance {
    let fam = CString::new(family).unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { bpb_instance_new(fam.as_ptr(), n, seed, &mut h) }, BpbStatus::Ok);
    assert!(!h.is_null());
    h
}

#[test]
fn instance_round_trip() {
    let h = instance("bp", 6, 3);
    let mut n = 0;
    assert_eq!(unsafe { bpb_instance_size(h, &mut n) }, BpbStatus::Ok);
    assert_eq!(n, 6);
    assert!(bpb_last_error().is_null());

    let mut empty = -1.0;
    assert_eq!(unsafe { bpb_instance_value(h, ptr::null(), 0, &mut empty) }, BpbStatus::Ok);
    assert_eq!(empty, 0.0);

    let mut picks = [usize::MAX; 3];
    assert_eq!(unsafe { bpb_instance_greedy(h, 3, picks.as_mut_ptr()) }, BpbStatus::Ok);
    let mut sorted = picks;
    sorted.sort_unstable();
    sorted.windows(2).for_each(|w| assert!(w[0] < w[1] && w[1] < 6));

    // Greedy value is monotone along its own prefix.
    let mut prev = 0.0;
    for k in 1..=3 {
        let mut v = 0.0;
        assert_eq!(unsafe { bpb_instance_value(h, picks.as_ptr(), k, &mut v) }, BpbStatus::Ok);
        assert!(v >= prev - 1e-12);
        prev = v;
    }

    let mut c = BpbConstants::default();
    assert_eq!(unsafe { bpb_instance_constants(h, &mut c) }, BpbStatus::Ok);
    for x in [c.kappa_f, c.kappa_g, c.gamma, c.zeta, c.alpha_bp, c.alpha_ws, c.alpha_dist] {
        assert!((0.0..=1.0).contains(&x), "{c:?}");
    }
    assert!(c.alpha_dist >= c.alpha_bp - 1e-12);
    unsafe { bpb_instance_free(h) };
}

#[test]
fn non_bp_instances_report_nan_curvature() {
    let h = instance("ws_mixture", 5, 1);
    let mut c = BpbConstants::default();
    assert_eq!(unsafe { bpb_instance_constants(h, &mut c) }, BpbStatus::Ok);
    assert!(c.kappa_f.is_nan() && c.alpha_bp.is_nan());
    assert!((0.0..=1.0).contains(&c.alpha_ws));
    unsafe { bpb_instance_free(h) };
}

#[test]
fn errors_set_status_and_message() {
    let fam = CString::new("nope").unwrap();
    let mut h = ptr::null_mut();
    let s = unsafe { bpb_instance_new(fam.as_ptr(), 4, 0, &mut h) };
    assert_eq!(s, BpbStatus::Config);
    assert!(h.is_null());
    assert!(last_error().contains("nope"), "{}", last_error());

    assert_eq!(unsafe { bpb_instance_new(ptr::null(), 4, 0, &mut h) }, BpbStatus::NullPointer);
    assert_eq!(unsafe { bpb_instance_size(ptr::null(), ptr::null_mut()) }, BpbStatus::NullPointer);

    let h = instance("bp", 4, 0);
    let bad = [0usize, 9];
    let mut v = 0.0;
    assert_eq!(unsafe { bpb_instance_value(h, bad.as_ptr(), 2, &mut v) }, BpbStatus::Config);
    let mut ids = [0usize; 8];
    assert_eq!(unsafe { bpb_instance_greedy(h, 5, ids.as_mut_ptr()) }, BpbStatus::InvalidArgument);
    // A success clears the message.
    let mut n = 0;
    assert_eq!(unsafe { bpb_instance_size(h, &mut n) }, BpbStatus::Ok);
    assert!(bpb_last_error().is_null());
    unsafe { bpb_instance_free(h) };
    unsafe { bpb_instance_free(ptr::null_mut()) };
}

#[test]
fn sketch_learns_a_smooth_function() {
    let mut sk = ptr::null_mut();
    assert_eq!(unsafe { bpb_sketch_new(1, 0.5, 0.01, 0.5, 1.0, 7, &mut sk) }, BpbStatus::Ok);

    // Before any point joins the dictionary prediction is a numerical error.
    let q = [0.0];
    let (mut m, mut v) = (0.0, 0.0);
    assert_eq!(unsafe { bpb_sketch_predict(sk, q.as_ptr(), 1, &mut m, &mut v) }, BpbStatus::Numerical);

    let mut joined_total = 0;
    for i in 0..200 {
        let x = [i as f64 / 200.0 * 4.0 - 2.0];
        let mut joined = 9u8;
        assert_eq!(unsafe { bpb_sketch_observe(sk, x.as_ptr(), x[0].sin(), &mut joined) }, BpbStatus::Ok, "{}", last_error());
        assert!(joined <= 1);
        joined_total += joined as usize;
    }
    let (mut t, mut g) = (0, 0);
    assert_eq!(unsafe { bpb_sketch_sizes(sk, &mut t, &mut g) }, BpbStatus::Ok);
    assert_eq!((t, g), (200, joined_total));
    assert!(g > 0 && g < 200);

    let xs = [-1.0, 0.0, 1.5];
    let (mut mean, mut var) = ([0.0; 3], [0.0; 3]);
    assert_eq!(unsafe { bpb_sketch_predict(sk, xs.as_ptr(), 3, mean.as_mut_ptr(), var.as_mut_ptr()) }, BpbStatus::Ok);
    for i in 0..3 {
        assert!((mean[i] - xs[i].sin()).abs() < 0.1, "x {} mean {}", xs[i], mean[i]);
        assert!(var[i] >= 0.0);
    }

    assert_eq!(unsafe { bpb_sketch_observe(sk, xs.as_ptr(), f64::NAN, ptr::null_mut()) }, BpbStatus::InvalidArgument);
    unsafe { bpb_sketch_free(sk) };

    let mut bad = ptr::null_mut();
    assert_eq!(unsafe { bpb_sketch_new(0, 1.0, 1.0, 0.5, 1.0, 0, &mut bad) }, BpbStatus::InvalidArgument);
    assert_eq!(unsafe { bpb_sketch_new(2, 1.0, -1.0, 0.5, 1.0, 0, &mut bad) }, BpbStatus::Config);
    assert!(bad.is_null());
}

#[test]
fn run_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cmd = CString::new("curvature").unwrap();
    let cfg = CString::new(r#"{"curvature": {"kind": "bp", "n": 5, "seed": 2}}"#).unwrap();
    let out = CString::new(dir.path().to_str().unwrap()).unwrap();
    assert_eq!(unsafe { bpb_run(cmd.as_ptr(), cfg.as_ptr(), out.as_ptr()) }, BpbStatus::Ok, "{:?}", bpb_last_error());
    assert!(dir.path().join("curvature.csv").exists());

    let bad = CString::new(r#"{"seeds": []}"#).unwrap();
    assert_eq!(unsafe { bpb_run(cmd.as_ptr(), bad.as_ptr(), out.as_ptr()) }, BpbStatus::Config);
    assert!(last_error().contains("seeds"));
    let unknown = CString::new("plot").unwrap();
    assert_eq!(unsafe { bpb_run(unknown.as_ptr(), cfg.as_ptr(), out.as_ptr()) }, BpbStatus::InvalidArgument);
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(bpb_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/bpb.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in ["bpb_run", "bpb_instance_new", "bpb_sketch_predict", "BPB_STATUS_PANIC", "bpb_last_error"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"bpb.h\"\nint main(void) { BpbInstance *h = 0; size_t n = 0;\n\
         BpbStatus s = bpb_instance_size(h, &n); bpb_instance_free(h); return s == BPB_STATUS_OK; }\n",
    )
    .unwrap();
    for (compiler, lang) in [("cc", "c"), ("c++", "c++")] {
        let status = Command::new(compiler)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang])
            .arg(&src)
            .arg("-I")
            .arg(header.parent().unwrap())
            .status();
        match status {
            Ok(s) => assert!(s.success(), "{compiler} rejected the header"),
            Err(_) => eprintln!("{compiler} not found; skipping"),
        }
    }
}
