//! C ABI over the `viewplan` crate.
//!
//! Objects cross the boundary as opaque handles (`VpTable`, `VpModel`,
//! `VpPlan`) created by `vp_*` constructors and released with the matching
//! `*_free` function. Every fallible call returns a `VpStatus`; on failure
//! `vp_last_error` describes the most recent error on the calling thread.
//! Panics are caught at the boundary and reported as `VP_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use viewplan::agents::{plan_with_model, train, Algorithm, TrainConfig, TrainedModel};
use viewplan::bench::{exact_min_cover, gen_instance, SyntheticSpec};
use viewplan::io::{
    load_coverage_cache, load_model, save_coverage_cache, save_model, Certification, CoverageCache,
};
use viewplan::planner::{run_alternating, run_fixed_lambda, Plan};
use viewplan::visibility::CoverageTable;
use viewplan::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Format = 4,
    DigestMismatch = 5,
    Numeric = 6,
    BufferTooSmall = 7,
    NotFound = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VpMethod {
    Greedy = 0,
    AltLambda = 1,
    FixedLambda = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VpAlgorithm {
    Sarsa = 0,
    WatkinsQ = 1,
    Td = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VpInstanceKind {
    GridTrap = 0,
    RandomPatches = 1,
}

/// Training hyperparameters. Fill with `vp_train_config_default` and
/// override fields as needed. `lambda_set` may be null, in which case the
/// default set {0, 1} is used; otherwise it must point to `lambda_count`
/// values that stay valid for the duration of `vp_train`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct VpTrainConfig {
    pub algorithm: VpAlgorithm,
    pub seed: u64,
    pub max_episodes: u64,
    pub epsilon_episodes: u64,
    pub alpha: f64,
    pub mu_e: f64,
    pub epsilon: f64,
    pub rcc: f64,
    pub hidden: u32,
    pub lambda_set: *const f64,
    pub lambda_count: usize,
}

pub struct VpTable {
    inner: CoverageTable,
    certification: Option<Certification>,
}

pub struct VpModel {
    inner: TrainedModel,
}

pub struct VpPlan {
    inner: Plan,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', "\\0")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(err: &Error) -> VpStatus {
    match err {
        Error::Io { .. } => VpStatus::Io,
        Error::Format { .. } | Error::Syntax { .. } | Error::Json(_) | Error::Csv(_) => {
            VpStatus::Format
        }
        Error::DigestMismatch { .. } => VpStatus::DigestMismatch,
        Error::NonFinite { .. } | Error::NonFiniteParameter => VpStatus::Numeric,
        _ => VpStatus::InvalidArgument,
    }
}

struct Fail(VpStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(VpStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, records any error or panic, and converts the outcome to a status.
fn guard<F>(f: F) -> VpStatus
where
    F: FnOnce() -> Result<(), Fail>,
{
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => VpStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            VpStatus::Panic
        }
    }
}

unsafe fn path_arg(p: *const c_char) -> Result<PathBuf, Fail> {
    if p.is_null() {
        return Err(null("path"));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(VpStatus::InvalidArgument, "path is not valid UTF-8".into()))?;
    Ok(PathBuf::from(s))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = value;
    Ok(())
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next `vp_*` call on the same thread.
#[no_mangle]
pub extern "C" fn vp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Loads a coverage cache file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vp_table_load(path: *const c_char, out: *mut *mut VpTable) -> VpStatus {
    guard(|| {
        let cache = load_coverage_cache(&path_arg(path)?)?;
        put(
            out,
            VpTable {
                inner: cache.table,
                certification: cache.certification,
            },
        )
    })
}

/// Generates a certified synthetic instance.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vp_table_generate(
    kind: VpInstanceKind,
    seed: u64,
    out: *mut *mut VpTable,
) -> VpStatus {
    guard(|| {
        let spec = match kind {
            VpInstanceKind::GridTrap => SyntheticSpec::grid_trap(seed),
            VpInstanceKind::RandomPatches => SyntheticSpec::random_patches(seed),
        };
        let inst = gen_instance(&spec)?;
        put(
            out,
            VpTable {
                inner: inst.table,
                certification: Some(Certification {
                    oracle_count: inst.oracle_count,
                    connected_oracle_count: inst.connected_oracle_count,
                    greedy_count: inst.greedy_count,
                }),
            },
        )
    })
}

/// Writes the table as a coverage cache file.
///
/// # Safety
/// `table` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn vp_table_save(table: *const VpTable, path: *const c_char) -> VpStatus {
    guard(|| {
        let t = deref(table, "table")?;
        let cache = CoverageCache {
            table: t.inner.clone(),
            certification: t.certification,
        };
        save_coverage_cache(&path_arg(path)?, &cache)?;
        Ok(())
    })
}

/// Number of candidate views in the table, or 0 for a null handle.
///
/// # Safety
/// `table` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vp_table_view_count(table: *const VpTable) -> usize {
    table.as_ref().map_or(0, |t| t.inner.view_count())
}

/// Exact minimum cover size recorded at generation time.
/// Returns `VP_STATUS_NOT_FOUND` if the table carries no such count.
///
/// # Safety
/// `table` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vp_table_oracle_count(table: *const VpTable, out: *mut usize) -> VpStatus {
    guard(|| {
        let t = deref(table, "table")?;
        match t.certification.and_then(|c| c.oracle_count) {
            Some(n) => write(out, n),
            None => Err(Fail(
                VpStatus::NotFound,
                "table has no certified oracle count".into(),
            )),
        }
    })
}

/// # Safety
/// `table` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vp_table_free(table: *mut VpTable) {
    free(table)
}

/// Plans with a fixed λ schedule. `lambda` is used only by `VP_METHOD_FIXED_LAMBDA`.
///
/// # Safety
/// `table` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vp_plan_baseline(
    table: *const VpTable,
    method: VpMethod,
    lambda: f64,
    rcc: f64,
    out: *mut *mut VpPlan,
) -> VpStatus {
    guard(|| {
        let t = &deref(table, "table")?.inner;
        let plan = match method {
            VpMethod::Greedy => run_fixed_lambda(t, 0.0, rcc, None)?,
            VpMethod::AltLambda => run_alternating(t, rcc)?,
            VpMethod::FixedLambda => {
                if !(lambda >= 0.0 && lambda.is_finite()) {
                    return Err(Fail(
                        VpStatus::InvalidArgument,
                        format!("lambda {lambda} must be >= 0"),
                    ));
                }
                let mut p = run_fixed_lambda(t, lambda, rcc, None)?;
                p.method = format!("fixed-lambda-{lambda}");
                p
            }
        };
        put(out, VpPlan { inner: plan })
    })
}

/// Minimum-size plan by exhaustive search (small tables only).
///
/// # Safety
/// `table` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vp_plan_exact(
    table: *const VpTable,
    rcc: f64,
    out: *mut *mut VpPlan,
) -> VpStatus {
    guard(|| {
        let t = &deref(table, "table")?.inner;
        put(
            out,
            VpPlan {
                inner: exact_min_cover(t, rcc)?.plan,
            },
        )
    })
}

/// Default hyperparameters for `algorithm`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vp_train_config_default(
    algorithm: VpAlgorithm,
    seed: u64,
    out: *mut VpTrainConfig,
) -> VpStatus {
    guard(|| {
        let d = TrainConfig::new(algorithm_of(algorithm), seed);
        write(
            out,
            VpTrainConfig {
                algorithm,
                seed,
                max_episodes: d.max_episodes as u64,
                epsilon_episodes: d.epsilon_episodes as u64,
                alpha: d.alpha,
                mu_e: d.mu_e,
                epsilon: d.epsilon,
                rcc: d.rcc,
                hidden: d.hidden as u32,
                lambda_set: ptr::null(),
                lambda_count: 0,
            },
        )
    })
}

fn algorithm_of(a: VpAlgorithm) -> Algorithm {
    match a {
        VpAlgorithm::Sarsa => Algorithm::Sarsa,
        VpAlgorithm::WatkinsQ => Algorithm::WatkinsQ,
        VpAlgorithm::Td => Algorithm::Td,
    }
}

/// Trains a λ-selection policy on `table`.
///
/// # Safety
/// `table` must be a live handle, `config` a valid config (see
/// `VpTrainConfig`), and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn vp_train(
    table: *const VpTable,
    config: *const VpTrainConfig,
    out: *mut *mut VpModel,
) -> VpStatus {
    guard(|| {
        let t = &deref(table, "table")?.inner;
        let c = deref(config, "config")?;
        let mut cfg = TrainConfig::new(algorithm_of(c.algorithm), c.seed);
        if !c.lambda_set.is_null() {
            cfg.lambda_set = std::slice::from_raw_parts(c.lambda_set, c.lambda_count).to_vec();
        }
        cfg.max_episodes = c.max_episodes as usize;
        cfg.epsilon_episodes = c.epsilon_episodes as usize;
        cfg.alpha = c.alpha;
        cfg.mu_e = c.mu_e;
        cfg.epsilon = c.epsilon;
        cfg.rcc = c.rcc;
        cfg.hidden = c.hidden as usize;
        put(
            out,
            VpModel {
                inner: train(t, &cfg)?,
            },
        )
    })
}

/// # Safety
/// `model` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn vp_model_save(model: *const VpModel, path: *const c_char) -> VpStatus {
    guard(|| {
        let m = deref(model, "model")?;
        save_model(&path_arg(path)?, &m.inner)?;
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vp_model_load(path: *const c_char, out: *mut *mut VpModel) -> VpStatus {
    guard(|| {
        let m = load_model(&path_arg(path)?)?;
        put(out, VpModel { inner: m })
    })
}

/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vp_model_free(model: *mut VpModel) {
    free(model)
}

/// Plans with a trained model. Fails with `VP_STATUS_DIGEST_MISMATCH` if the
/// model was trained on another table, unless `allow_digest_mismatch` is nonzero.
///
/// # Safety
/// `model` and `table` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vp_plan_with_model(
    model: *const VpModel,
    table: *const VpTable,
    rcc: f64,
    allow_digest_mismatch: i32,
    out: *mut *mut VpPlan,
) -> VpStatus {
    guard(|| {
        let m = &deref(model, "model")?.inner;
        let t = &deref(table, "table")?.inner;
        let mode = if allow_digest_mismatch != 0 {
            viewplan::io::DigestCheck::Warn
        } else {
            viewplan::io::DigestCheck::Reject
        };
        viewplan::io::check_digests(m, t, mode)?;
        put(
            out,
            VpPlan {
                inner: plan_with_model(m, t, rcc)?,
            },
        )
    })
}

/// Number of views in the plan, or 0 for a null handle.
///
/// # Safety
/// `plan` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vp_plan_len(plan: *const VpPlan) -> usize {
    plan.as_ref().map_or(0, |p| p.inner.len())
}

/// Copies the selected view indices into `buf`. `*len` receives the plan
/// length; if `cap` is smaller, nothing is copied and
/// `VP_STATUS_BUFFER_TOO_SMALL` is returned.
///
/// # Safety
/// `plan` must be a live handle, `buf` writable for `cap` elements (may be
/// null when `cap` is 0), and `len` writable.
#[no_mangle]
pub unsafe extern "C" fn vp_plan_order(
    plan: *const VpPlan,
    buf: *mut usize,
    cap: usize,
    len: *mut usize,
) -> VpStatus {
    guard(|| {
        let order = &deref(plan, "plan")?.inner.order;
        write(len, order.len())?;
        if cap < order.len() {
            return Err(Fail(
                VpStatus::BufferTooSmall,
                format!("buffer holds {cap} views, plan has {}", order.len()),
            ));
        }
        if !order.is_empty() {
            if buf.is_null() {
                return Err(null("buffer"));
            }
            ptr::copy_nonoverlapping(order.as_ptr(), buf, order.len());
        }
        Ok(())
    })
}

/// Covered fraction of the achievable area, or NaN for a null handle.
///
/// # Safety
/// `plan` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vp_plan_coverage_fraction(plan: *const VpPlan) -> f64 {
    plan.as_ref()
        .map_or(f64::NAN, |p| p.inner.final_coverage_fraction)
}

/// 1 if the plan reached its coverage target, 0 otherwise (or for null).
///
/// # Safety
/// `plan` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vp_plan_complete(plan: *const VpPlan) -> i32 {
    plan.as_ref().map_or(0, |p| p.inner.complete as i32)
}

/// # Safety
/// `plan` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vp_plan_free(plan: *mut VpPlan) {
    free(plan)
}
