//! C ABI for `hybridopt`.
//!
//! Every function returns an [`HoStatus`]. On failure a description is kept
//! per thread and can be fetched with [`ho_last_error_message`]. Handles are
//! opaque pointers that must be released with their matching `*_free`
//! function; they are not thread-safe, so callers serialize access to each.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, c_void, CStr};
use std::mem::ManuallyDrop;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use hybridopt::bo::{BoConfig, BoState};
use hybridopt::continuous::ContinuousOptimizer;
use hybridopt::functions::{synthetic, FnObjective, Objective, SYNTHETIC_NAMES};
use hybridopt::hybrid::{HybridConfig, HybridOptimizer};
use hybridopt::rng::substream;
use hybridopt::space::{ContinuousVar, DiscreteVar, MixedSpace};
use hybridopt::{Error, EvalError};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnknownFunction = 3,
    Evaluation = 4,
    Numerical = 5,
    Serialization = 6,
    BufferTooSmall = 7,
    NoData = 8,
    Panic = 9,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn fail(status: HoStatus, msg: impl Into<String>) -> HoStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> HoStatus {
    let status = match &e {
        Error::Evaluation { .. } => HoStatus::Evaluation,
        Error::Factorization { .. } => HoStatus::Numerical,
        Error::Serde(_) | Error::Version { .. } => HoStatus::Serialization,
        _ => HoStatus::InvalidArgument,
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> HoStatus) -> HoStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(HoStatus::Panic, "internal panic"),
    }
}

/// Build a slice from a C pointer, allowing null only when `len == 0`.
unsafe fn slice_in<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], HoStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(HoStatus::NullPointer, format!("{what} is null")));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn slice_out<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], HoStatus> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(fail(HoStatus::NullPointer, format!("{what} is null")));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

macro_rules! tri {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(status) => return status,
        }
    };
}

macro_rules! handle {
    ($p:expr) => {
        match unsafe { $p.as_mut() } {
            Some(h) => h,
            None => return fail(HoStatus::NullPointer, "handle is null"),
        }
    };
}

/// Copy the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length excluding the NUL.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn ho_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Bayesian optimizer over a box.
pub struct HoBoState {
    inner: BoState,
}

/// Create an optimizer over `[lower[i], upper[i]]` for `dim` coordinates.
///
/// # Safety
/// `lower` and `upper` must point to `dim` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ho_bo_new(
    dim: usize,
    lower: *const f64,
    upper: *const f64,
    seed: u64,
    out: *mut *mut HoBoState,
) -> HoStatus {
    guard(|| {
        if out.is_null() {
            return fail(HoStatus::NullPointer, "out is null");
        }
        let lower = tri!(slice_in(lower, dim, "lower"));
        let upper = tri!(slice_in(upper, dim, "upper"));
        let bounds: Result<Vec<_>, _> = lower
            .iter()
            .zip(upper)
            .enumerate()
            .map(|(i, (&lo, &hi))| ContinuousVar::new(format!("x{i}"), lo, hi))
            .collect();
        let bounds = match bounds {
            Ok(b) => b,
            Err(e) => return from_error(e),
        };
        let state = BoState::new(bounds, BoConfig::default(), substream(seed, 0));
        *out = Box::into_raw(Box::new(HoBoState { inner: state }));
        HoStatus::Ok
    })
}

/// Write the next point to evaluate into `x` (`dim` doubles).
///
/// # Safety
/// `state` must come from this library; `x` must point to `dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn ho_bo_suggest(state: *mut HoBoState, x: *mut f64, dim: usize) -> HoStatus {
    guard(|| {
        let state = handle!(state);
        if dim != state.inner.bounds().len() {
            return fail(HoStatus::InvalidArgument, format!("dim {dim} != {}", state.inner.bounds().len()));
        }
        let x = tri!(slice_out(x, dim, "x"));
        match state.inner.suggest() {
            Ok(point) => {
                x.copy_from_slice(&point);
                HoStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Report the objective value `y` at `x`.
///
/// # Safety
/// `state` must come from this library; `x` must point to `dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn ho_bo_observe(state: *mut HoBoState, x: *const f64, dim: usize, y: f64) -> HoStatus {
    guard(|| {
        let state = handle!(state);
        if dim != state.inner.bounds().len() {
            return fail(HoStatus::InvalidArgument, format!("dim {dim} != {}", state.inner.bounds().len()));
        }
        let x = tri!(slice_in(x, dim, "x"));
        match state.inner.observe(x.to_vec(), y) {
            Ok(()) => HoStatus::Ok,
            Err(e) => from_error(e),
        }
    })
}

/// Best observation so far; `NoData` before the first observation.
///
/// # Safety
/// `state` must come from this library; `x` must point to `dim` doubles and
/// `y` be writable.
#[no_mangle]
pub unsafe extern "C" fn ho_bo_best(state: *mut HoBoState, x: *mut f64, dim: usize, y: *mut f64) -> HoStatus {
    guard(|| {
        let state = handle!(state);
        if dim != state.inner.bounds().len() {
            return fail(HoStatus::InvalidArgument, format!("dim {dim} != {}", state.inner.bounds().len()));
        }
        if y.is_null() {
            return fail(HoStatus::NullPointer, "y is null");
        }
        let x = tri!(slice_out(x, dim, "x"));
        match state.inner.best() {
            Some((bx, by)) => {
                x.copy_from_slice(bx);
                *y = by;
                HoStatus::Ok
            }
            None => fail(HoStatus::NoData, "no observations yet"),
        }
    })
}

/// Serialize the optimizer into `buf`. `*written` receives the byte count
/// needed; if `cap` is too small nothing is copied and `BufferTooSmall` is
/// returned, so a call with `cap == 0` queries the size.
///
/// # Safety
/// `buf` must be null or point to `cap` writable bytes; `written` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ho_bo_serialize(
    state: *const HoBoState,
    buf: *mut u8,
    cap: usize,
    written: *mut usize,
) -> HoStatus {
    guard(|| {
        let Some(state) = state.as_ref() else {
            return fail(HoStatus::NullPointer, "handle is null");
        };
        if written.is_null() {
            return fail(HoStatus::NullPointer, "written is null");
        }
        let bytes = match state.inner.serialize() {
            Ok(b) => b,
            Err(e) => return from_error(e),
        };
        *written = bytes.len();
        if cap < bytes.len() {
            return fail(HoStatus::BufferTooSmall, format!("need {} bytes, have {cap}", bytes.len()));
        }
        let out = tri!(slice_out(buf, bytes.len(), "buf"));
        out.copy_from_slice(&bytes);
        HoStatus::Ok
    })
}

/// Rebuild an optimizer from bytes produced by [`ho_bo_serialize`].
///
/// # Safety
/// `bytes` must point to `len` bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ho_bo_deserialize(bytes: *const u8, len: usize, out: *mut *mut HoBoState) -> HoStatus {
    guard(|| {
        if out.is_null() {
            return fail(HoStatus::NullPointer, "out is null");
        }
        let bytes = tri!(slice_in(bytes, len, "bytes"));
        match BoState::deserialize(bytes) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(HoBoState { inner }));
                HoStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `state` must be null or come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ho_bo_free(state: *mut HoBoState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Objective callback: evaluate at `discrete[0..n_discrete]`,
/// `continuous[0..n_continuous]`, store the value in `*value` and return 0,
/// or return nonzero to signal failure.
pub type HoObjectiveFn = Option<
    unsafe extern "C" fn(
        user_data: *mut c_void,
        discrete: *const f64,
        n_discrete: usize,
        continuous: *const f64,
        n_continuous: usize,
        value: *mut f64,
    ) -> c_int,
>;

struct Callback {
    f: unsafe extern "C" fn(*mut c_void, *const f64, usize, *const f64, usize, *mut f64) -> c_int,
    user_data: *mut c_void,
}

// The handle is documented as single-threaded; the objective is only ever
// called from the thread driving `ho_hybrid_step`.
unsafe impl Send for Callback {}
unsafe impl Sync for Callback {}

impl Callback {
    fn call(&self, discrete: &[f64], continuous: &[f64]) -> Result<f64, EvalError> {
        let mut value = f64::NAN;
        let code = unsafe {
            (self.f)(
                self.user_data,
                discrete.as_ptr(),
                discrete.len(),
                continuous.as_ptr(),
                continuous.len(),
                &mut value,
            )
        };
        if code != 0 {
            return Err(EvalError::InvalidInput(format!("callback returned {code}")));
        }
        Ok(value)
    }
}

/// Hybrid bandit + Bayesian optimizer bound to one objective.
pub struct HoHybrid {
    // borrows `objective`; dropped first
    optimizer: ManuallyDrop<HybridOptimizer<'static>>,
    objective: *mut (dyn Objective + 'static),
}

impl Drop for HoHybrid {
    fn drop(&mut self) {
        unsafe {
            ManuallyDrop::drop(&mut self.optimizer);
            drop(Box::from_raw(self.objective));
        }
    }
}

fn hybrid_config(n: usize, alpha: f64, seed: u64) -> HybridConfig {
    HybridConfig {
        n,
        alpha,
        // the caller decides how many steps to take
        stop: None,
        seed,
        ..HybridConfig::default()
    }
}

unsafe fn make_hybrid(objective: Box<dyn Objective>, config: HybridConfig, out: *mut *mut HoHybrid) -> HoStatus {
    let objective: *mut dyn Objective = Box::into_raw(objective);
    match HybridOptimizer::new(&*objective, config) {
        Ok(optimizer) => {
            *out = Box::into_raw(Box::new(HoHybrid {
                optimizer: ManuallyDrop::new(optimizer),
                objective,
            }));
            HoStatus::Ok
        }
        Err(e) => {
            drop(Box::from_raw(objective));
            from_error(e)
        }
    }
}

/// Hybrid optimizer over a built-in objective (`"shekel"`, `"composition"`
/// or `"sine_permutation"`), with `n` continuous steps per visited arm.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ho_hybrid_new_synthetic(
    name: *const c_char,
    n: usize,
    alpha: f64,
    seed: u64,
    out: *mut *mut HoHybrid,
) -> HoStatus {
    guard(|| {
        if name.is_null() || out.is_null() {
            return fail(HoStatus::NullPointer, "name or out is null");
        }
        let Ok(name) = CStr::from_ptr(name).to_str() else {
            return fail(HoStatus::InvalidArgument, "name is not UTF-8");
        };
        let Some(objective) = synthetic(name) else {
            return fail(
                HoStatus::UnknownFunction,
                format!("unknown function `{name}`; available: {}", SYNTHETIC_NAMES.join(", ")),
            );
        };
        make_hybrid(objective, hybrid_config(n, alpha, seed), out)
    })
}

/// Hybrid optimizer over a caller-supplied objective.
///
/// Discrete variable `i` takes the `domain_sizes[i]` values stored
/// consecutively in `domains` (strictly increasing); continuous variable `j`
/// ranges over `[lower[j], upper[j]]`.
///
/// # Safety
/// Array arguments must hold the stated number of elements; `callback` must
/// stay valid, and `user_data` usable by it, until the handle is freed.
#[no_mangle]
pub unsafe extern "C" fn ho_hybrid_new_callback(
    n_discrete: usize,
    domain_sizes: *const usize,
    domains: *const f64,
    n_continuous: usize,
    lower: *const f64,
    upper: *const f64,
    callback: HoObjectiveFn,
    user_data: *mut c_void,
    n: usize,
    alpha: f64,
    seed: u64,
    out: *mut *mut HoHybrid,
) -> HoStatus {
    guard(|| {
        let Some(f) = callback else {
            return fail(HoStatus::NullPointer, "callback is null");
        };
        if out.is_null() {
            return fail(HoStatus::NullPointer, "out is null");
        }
        let sizes = tri!(slice_in(domain_sizes, n_discrete, "domain_sizes"));
        let total: usize = sizes.iter().sum();
        let values = tri!(slice_in(domains, total, "domains"));
        let lower = tri!(slice_in(lower, n_continuous, "lower"));
        let upper = tri!(slice_in(upper, n_continuous, "upper"));

        let mut offset = 0;
        let mut discrete = Vec::with_capacity(n_discrete);
        for (i, &size) in sizes.iter().enumerate() {
            match DiscreteVar::new(format!("d{i}"), values[offset..offset + size].to_vec()) {
                Ok(v) => discrete.push(v),
                Err(e) => return from_error(e),
            }
            offset += size;
        }
        let continuous: Result<Vec<_>, _> = lower
            .iter()
            .zip(upper)
            .enumerate()
            .map(|(j, (&lo, &hi))| ContinuousVar::new(format!("c{j}"), lo, hi))
            .collect();
        let space = match continuous.and_then(|c| MixedSpace::new(discrete, c)) {
            Ok(s) => s,
            Err(e) => return from_error(e),
        };
        let cb = Callback { f, user_data };
        let objective = FnObjective::new("callback", space, move |d: &[f64], c: &[f64]| cb.call(d, c));
        make_hybrid(Box::new(objective), hybrid_config(n, alpha, seed), out)
    })
}

/// Number of discrete and continuous variables.
///
/// # Safety
/// `h` must come from this library; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn ho_hybrid_dims(h: *mut HoHybrid, n_discrete: *mut usize, n_continuous: *mut usize) -> HoStatus {
    guard(|| {
        let h = handle!(h);
        if n_discrete.is_null() || n_continuous.is_null() {
            return fail(HoStatus::NullPointer, "output is null");
        }
        let space = (*h.objective).space();
        *n_discrete = space.discrete().len();
        *n_continuous = space.continuous().len();
        HoStatus::Ok
    })
}

/// Run one iteration; `*best` (if non-null) receives the best value so far.
///
/// # Safety
/// `h` must come from this library; `best` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn ho_hybrid_step(h: *mut HoHybrid, best: *mut f64) -> HoStatus {
    guard(|| {
        let h = handle!(h);
        match h.optimizer.step() {
            Ok(record) => {
                if !best.is_null() {
                    *best = record.best_so_far;
                }
                HoStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Best point found so far; `NoData` before the first step.
///
/// # Safety
/// `h` must come from this library; `discrete`/`continuous` must hold the
/// counts reported by [`ho_hybrid_dims`]; `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ho_hybrid_best(
    h: *mut HoHybrid,
    discrete: *mut f64,
    n_discrete: usize,
    continuous: *mut f64,
    n_continuous: usize,
    value: *mut f64,
) -> HoStatus {
    guard(|| {
        let h = handle!(h);
        if value.is_null() {
            return fail(HoStatus::NullPointer, "value is null");
        }
        let Some((v, d, c)) = h.optimizer.best() else {
            return fail(HoStatus::NoData, "no iterations yet");
        };
        if d.len() != n_discrete || c.len() != n_continuous {
            return fail(
                HoStatus::InvalidArgument,
                format!("expected {} discrete and {} continuous slots", d.len(), c.len()),
            );
        }
        tri!(slice_out(discrete, n_discrete, "discrete")).copy_from_slice(d);
        tri!(slice_out(continuous, n_continuous, "continuous")).copy_from_slice(c);
        *value = v;
        HoStatus::Ok
    })
}

/// Completed iterations and objective evaluations.
///
/// # Safety
/// `h` must come from this library; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn ho_hybrid_counts(h: *mut HoHybrid, iterations: *mut usize, evaluations: *mut usize) -> HoStatus {
    guard(|| {
        let h = handle!(h);
        if iterations.is_null() || evaluations.is_null() {
            return fail(HoStatus::NullPointer, "output is null");
        }
        *iterations = h.optimizer.iterations();
        *evaluations = h.optimizer.evaluations();
        HoStatus::Ok
    })
}

/// # Safety
/// `h` must be null or come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ho_hybrid_free(h: *mut HoHybrid) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}
