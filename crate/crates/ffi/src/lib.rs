//! C ABI over `bpb-core`.
//!
//! Every function returns a [`BpbStatus`]. On failure the message is kept in
//! thread-local storage and can be read with [`bpb_last_error`] until the next
//! call on the same thread. Handles are opaque and must be released with their
//! matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::slice;

use bpb_core::cli::{self, Subcommand};
use bpb_core::config::parse_config;
use bpb_core::kernels::{ContextPoint, KernelSpec, Operand};
use bpb_core::nystrom::{NystromParams, NystromState};
use bpb_core::objectives::{Instance, InstanceSpec, WeakSubmodReport};
use bpb_core::offline::{alpha_ratios, greedy};
use bpb_core::{exit, Error};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BpbStatus {
    Ok = 0,
    Io = 1,
    Config = 2,
    Numerical = 3,
    Infeasible = 4,
    NullPointer = 5,
    InvalidArgument = 6,
    Panic = 7,
}

/// A generated benchmark objective.
pub struct BpbInstance {
    inner: Instance,
}

/// A Nystrom-sketched kernel regressor over real vectors with an RBF kernel.
pub struct BpbSketch {
    state: NystromState,
    dim: usize,
    rng: ChaCha8Rng,
}

/// Curvature constants of an instance and the ratios derived from them.
/// `kappa_f` and `kappa_g` are NaN for instances without a BP decomposition.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct BpbConstants {
    pub kappa_f: f64,
    pub kappa_g: f64,
    pub gamma: f64,
    pub zeta: f64,
    pub alpha_bp: f64,
    pub alpha_ws: f64,
    pub alpha_dist: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(err: &Error) -> BpbStatus {
    match err.exit_code() {
        exit::IO => BpbStatus::Io,
        exit::NUMERICAL => BpbStatus::Numerical,
        exit::INFEASIBLE => BpbStatus::Infeasible,
        _ => BpbStatus::Config,
    }
}

struct Fail(BpbStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(BpbStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(BpbStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> BpbStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BpbStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_error(format!("panic: {msg}"));
            BpbStatus::Panic
        }
    }
}

unsafe fn text<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if ptr.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

unsafe fn array<'a, T>(ptr: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(ptr, len))
}

unsafe fn out<'a, T>(ptr: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    ptr.as_mut().ok_or_else(|| null(what))
}

/// Message of the last failed call on this thread, or NULL after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn bpb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bpb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Runs `command` (`simulate`, `offline`, `curvature` or `deff-sweep`) on a
/// JSON experiment document. A non-NULL `out_dir` replaces the document's
/// output directory.
///
/// # Safety
/// `command` and `config_json` must be NUL-terminated strings; `out_dir` may
/// be NULL.
#[no_mangle]
pub unsafe extern "C" fn bpb_run(command: *const c_char, config_json: *const c_char, out_dir: *const c_char) -> BpbStatus {
    guard(|| {
        let cmd = match text(command, "command")? {
            "simulate" => Subcommand::Simulate,
            "offline" => Subcommand::Offline,
            "curvature" => Subcommand::Curvature,
            "deff-sweep" => Subcommand::DeffSweep,
            other => return Err(invalid(format!("unknown command {other:?}"))),
        };
        let mut cfg = parse_config(text(config_json, "config_json")?).map_err(Error::from)?;
        if !out_dir.is_null() {
            cfg.output_dir = PathBuf::from(text(out_dir, "out_dir")?);
        }
        cli::run(cmd, &cfg)?;
        Ok(())
    })
}

/// Generates a random instance of `family` (`bp`, `ws_mixture`, ...) on `n` items.
///
/// # Safety
/// `family` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bpb_instance_new(
    family: *const c_char,
    n: usize,
    seed: u64,
    out_handle: *mut *mut BpbInstance,
) -> BpbStatus {
    guard(|| {
        let slot = out(out_handle, "out")?;
        *slot = std::ptr::null_mut();
        let inner = InstanceSpec::new(text(family, "family")?, n, seed).generate().map_err(Error::from)?;
        *slot = Box::into_raw(Box::new(BpbInstance { inner }));
        Ok(())
    })
}

/// # Safety
/// `handle` must come from [`bpb_instance_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bpb_instance_free(handle: *mut BpbInstance) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// # Safety
/// `handle` must be a live instance and `n` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bpb_instance_size(handle: *const BpbInstance, n: *mut usize) -> BpbStatus {
    guard(|| {
        let inst = handle.as_ref().ok_or_else(|| null("handle"))?;
        *out(n, "n")? = inst.inner.oracle().n();
        Ok(())
    })
}

/// Objective value of the set `ids[0..len]`.
///
/// # Safety
/// `ids` must point to `len` readable items (may be NULL when `len` is 0).
#[no_mangle]
pub unsafe extern "C" fn bpb_instance_value(
    handle: *const BpbInstance,
    ids: *const usize,
    len: usize,
    value: *mut f64,
) -> BpbStatus {
    guard(|| {
        let inst = handle.as_ref().ok_or_else(|| null("handle"))?;
        let set = array(ids, len, "ids")?;
        *out(value, "value")? = inst.inner.oracle().value(set).map_err(Error::from)?;
        Ok(())
    })
}

/// Greedy selection of `k` items written to `ids[0..k]` in pick order.
///
/// # Safety
/// `ids` must have room for `k` items.
#[no_mangle]
pub unsafe extern "C" fn bpb_instance_greedy(handle: *const BpbInstance, k: usize, ids: *mut usize) -> BpbStatus {
    guard(|| {
        let inst = handle.as_ref().ok_or_else(|| null("handle"))?;
        let h = inst.inner.oracle();
        if k > h.n() {
            return Err(invalid(format!("k = {k} exceeds n = {}", h.n())));
        }
        if k > 0 && ids.is_null() {
            return Err(null("ids"));
        }
        let picked = greedy(h, k).map_err(Error::from)?;
        if k > 0 {
            slice::from_raw_parts_mut(ids, k).copy_from_slice(&picked);
        }
        Ok(())
    })
}

/// Curvatures, weak-submodularity constants and approximation ratios.
///
/// # Safety
/// `handle` must be a live instance and `constants` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bpb_instance_constants(handle: *const BpbInstance, constants: *mut BpbConstants) -> BpbStatus {
    guard(|| {
        let inst = handle.as_ref().ok_or_else(|| null("handle"))?;
        let slot = out(constants, "constants")?;
        let ws = WeakSubmodReport::compute(inst.inner.oracle()).map_err(Error::from)?;
        let (kf, kg) = match inst.inner.as_bp() {
            Some(bp) => {
                let c = bp.curvatures().map_err(Error::from)?;
                (c.kappa_f, c.kappa_g)
            }
            None => (f64::NAN, f64::NAN),
        };
        let r = alpha_ratios(
            if kf.is_nan() { 0.0 } else { kf },
            if kg.is_nan() { 0.0 } else { kg },
            ws.gamma,
            ws.zeta,
        )
        .map_err(Error::from)?;
        let bp_only = |x: f64| if kf.is_nan() { f64::NAN } else { x };
        *slot = BpbConstants {
            kappa_f: kf,
            kappa_g: kg,
            gamma: ws.gamma,
            zeta: ws.zeta,
            alpha_bp: bp_only(r.alpha_bp),
            alpha_ws: r.alpha_ws,
            alpha_dist: bp_only(r.alpha_dist),
        };
        Ok(())
    })
}

/// New empty sketch over `dim`-dimensional inputs with an RBF kernel.
///
/// # Safety
/// `out_handle` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bpb_sketch_new(
    dim: usize,
    bandwidth: f64,
    lambda: f64,
    eta: f64,
    budget: f64,
    seed: u64,
    out_handle: *mut *mut BpbSketch,
) -> BpbStatus {
    guard(|| {
        let slot = out(out_handle, "out")?;
        *slot = std::ptr::null_mut();
        if dim == 0 {
            return Err(invalid("dim must be positive"));
        }
        let kernel = KernelSpec::Rbf { operand: Operand::Item, bandwidth };
        let state = NystromState::new(kernel, NystromParams::new(lambda, eta, budget)).map_err(Error::from)?;
        *slot = Box::into_raw(Box::new(BpbSketch { state, dim, rng: ChaCha8Rng::seed_from_u64(seed) }));
        Ok(())
    })
}

/// # Safety
/// `handle` must come from [`bpb_sketch_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bpb_sketch_free(handle: *mut BpbSketch) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

fn point(x: &[f64]) -> ContextPoint {
    ContextPoint::from_parts(Vec::new(), Vec::new(), 0, x.to_vec(), Vec::new())
}

/// Adds the observation `(x, y)`. `joined` (optional) receives 1 when the
/// point entered the dictionary.
///
/// # Safety
/// `x` must point to `dim` readable doubles; `joined` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn bpb_sketch_observe(handle: *mut BpbSketch, x: *const f64, y: f64, joined: *mut u8) -> BpbStatus {
    guard(|| {
        let sk = handle.as_mut().ok_or_else(|| null("handle"))?;
        let x = array(x, sk.dim, "x")?;
        if !y.is_finite() {
            return Err(invalid("y must be finite"));
        }
        let before = sk.state.g_size();
        sk.state.observe(&point(x), y, &mut sk.rng).map_err(Error::from)?;
        if let Some(j) = joined.as_mut() {
            // Sampled points already in the span of the dictionary are skipped.
            *j = u8::from(sk.state.g_size() > before);
        }
        Ok(())
    })
}

/// Posterior mean and variance at `count` points stored row-major in `xs`.
///
/// # Safety
/// `xs` must hold `count * dim` doubles; `mean` and `var` room for `count`.
#[no_mangle]
pub unsafe extern "C" fn bpb_sketch_predict(
    handle: *const BpbSketch,
    xs: *const f64,
    count: usize,
    mean: *mut f64,
    var: *mut f64,
) -> BpbStatus {
    guard(|| {
        let sk = handle.as_ref().ok_or_else(|| null("handle"))?;
        let flat = array(xs, count * sk.dim, "xs")?;
        if count > 0 && (mean.is_null() || var.is_null()) {
            return Err(null("mean or var"));
        }
        let queries: Vec<ContextPoint> = flat.chunks(sk.dim).map(point).collect();
        let est = sk.state.mv_calc(&queries).map_err(Error::from)?;
        if count > 0 {
            slice::from_raw_parts_mut(mean, count).copy_from_slice(&est.mean);
            slice::from_raw_parts_mut(var, count).copy_from_slice(&est.var);
        }
        Ok(())
    })
}

/// Number of observations and dictionary size.
///
/// # Safety
/// `handle` must be live; either output may be NULL.
#[no_mangle]
pub unsafe extern "C" fn bpb_sketch_sizes(handle: *const BpbSketch, t: *mut usize, g: *mut usize) -> BpbStatus {
    guard(|| {
        let sk = handle.as_ref().ok_or_else(|| null("handle"))?;
        if let Some(t) = t.as_mut() {
            *t = sk.state.t();
        }
        if let Some(g) = g.as_mut() {
            *g = sk.state.g_size();
        }
        Ok(())
    })
}
