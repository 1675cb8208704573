//! C ABI for the atbench library: opaque cache handles, status codes, and a
//! thread-local last-error message. The matching header lives in
//! `include/atbench.h`.
//!
//! Ownership: every `*mut AtbCache` returned by a constructor must be
//! released with `atb_cache_free`. Returned strings are borrowed and valid
//! until the next failing call on the same thread (`atb_last_error`) or are
//! static (`atb_version`).

use atbench::cache::{self, SynthKind, TuningCache};
use atbench::methodology::{
    aggregate, baseline_curve, compute_budget, performance_curve, TimeGrid,
};
use atbench::opt::AlgorithmSpec;
use atbench::sim::run_optimizer;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

/// Opaque handle to a loaded tuning cache.
pub struct AtbCache(TuningCache);

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtbStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// Arguments were malformed (bad UTF-8, unknown name, out of range).
    InvalidArgument = 2,
    /// The file could not be read or written.
    Io = 3,
    /// The cache exists but fails validation.
    Data = 4,
    /// The computation itself failed (degenerate space, optimizer error).
    Runtime = 5,
    /// A panic was caught at the boundary.
    Internal = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(status: AtbStatus, message: impl Into<Vec<u8>>) -> AtbStatus {
    let message = CString::new(message).unwrap_or_else(|_| CString::new("invalid error").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(message));
    status
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

fn cache_status(e: &cache::CacheError) -> AtbStatus {
    match e {
        cache::CacheError::Io(_) => AtbStatus::Io,
        cache::CacheError::TooLarge { .. } | cache::CacheError::InvalidRequest(_) => {
            AtbStatus::InvalidArgument
        }
        _ => AtbStatus::Data,
    }
}

/// Guards the boundary against panics and stores error messages.
fn guarded(f: impl FnOnce() -> Result<(), (AtbStatus, String)>) -> AtbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            clear_error();
            AtbStatus::Ok
        }
        Ok(Err((status, message))) => set_error(status, message),
        Err(_) => set_error(AtbStatus::Internal, "panic at the ffi boundary"),
    }
}

unsafe fn required_str<'a>(ptr: *const c_char) -> Result<&'a str, (AtbStatus, String)> {
    if ptr.is_null() {
        return Err((AtbStatus::NullArgument, "null string argument".into()));
    }
    unsafe { CStr::from_ptr(ptr) }
        .to_str()
        .map_err(|_| (AtbStatus::InvalidArgument, "string is not valid UTF-8".into()))
}

fn required_out<T>(ptr: *mut T) -> Result<(), (AtbStatus, String)> {
    if ptr.is_null() {
        return Err((AtbStatus::NullArgument, "null output pointer".into()));
    }
    Ok(())
}

unsafe fn required_cache<'a>(
    cache: *const AtbCache,
) -> Result<&'a TuningCache, (AtbStatus, String)> {
    if cache.is_null() {
        return Err((AtbStatus::NullArgument, "null cache handle".into()));
    }
    Ok(unsafe { &(*cache).0 })
}

/// Version of the library as a static string.
#[no_mangle]
pub extern "C" fn atb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message of the last error on this thread, or null. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn atb_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(ptr::null(), |msg| msg.as_ptr())
    })
}

/// Loads and validates a cache file into a new handle.
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn atb_cache_load(
    path: *const c_char,
    out: *mut *mut AtbCache,
) -> AtbStatus {
    guarded(|| {
        required_out(out)?;
        let path = unsafe { required_str(path) }?;
        let cache = cache::load_cache(path).map_err(|e| (cache_status(&e), e.to_string()))?;
        unsafe { *out = Box::into_raw(Box::new(AtbCache(cache))) };
        Ok(())
    })
}

/// Generates a synthetic cache. `kind` is "bowl", "rugged", or
/// "uniform_random".
///
/// # Safety
/// `kind` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn atb_cache_synth(
    kind: *const c_char,
    dims: u32,
    points_per_dim: u32,
    seed: u64,
    out: *mut *mut AtbCache,
) -> AtbStatus {
    guarded(|| {
        required_out(out)?;
        let kind: SynthKind = unsafe { required_str(kind) }?
            .parse()
            .map_err(|e: String| (AtbStatus::InvalidArgument, e))?;
        let cache = cache::synth_cache(kind, dims, points_per_dim, seed)
            .map_err(|e| (cache_status(&e), e.to_string()))?;
        unsafe { *out = Box::into_raw(Box::new(AtbCache(cache))) };
        Ok(())
    })
}

/// Writes the cache to a file in the documented JSON format.
///
/// # Safety
/// `cache` must be a live handle and `path` a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn atb_cache_write(
    cache: *const AtbCache,
    path: *const c_char,
) -> AtbStatus {
    guarded(|| {
        let cache = unsafe { required_cache(cache) }?;
        let path = unsafe { required_str(path) }?;
        cache::write_cache(cache, path).map_err(|e| (cache_status(&e), e.to_string()))
    })
}

/// Releases a cache handle. Null is ignored.
///
/// # Safety
/// `cache` must be null or a handle returned by a constructor, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn atb_cache_free(cache: *mut AtbCache) {
    if !cache.is_null() {
        drop(unsafe { Box::from_raw(cache) });
    }
}

macro_rules! cache_scalar_getter {
    ($(#[$doc:meta])* $name:ident, $ty:ty, |$c:ident| $expr:expr) => {
        $(#[$doc])*
        /// # Safety
        /// `cache` must be a live handle and `out` a valid pointer.
        #[no_mangle]
        pub unsafe extern "C" fn $name(cache: *const AtbCache, out: *mut $ty) -> AtbStatus {
            guarded(|| {
                required_out(out)?;
                let $c = unsafe { required_cache(cache) }?;
                unsafe { *out = $expr };
                Ok(())
            })
        }
    };
}

cache_scalar_getter!(
    /// Size of the unconstrained Cartesian space.
    atb_cache_cartesian_size, u64, |c| c.space().cartesian_size());
cache_scalar_getter!(
    /// Number of valid configurations.
    atb_cache_constrained_size, u64, |c| c.space().constrained_size());
cache_scalar_getter!(
    /// Number of tunable parameters.
    atb_cache_dimension_count, u32, |c| c.space().dimension_count() as u32);
cache_scalar_getter!(
    /// Best objective value (minimization-normalized).
    atb_cache_optimum, f64, |c| c.stats().optimum);
cache_scalar_getter!(
    /// Median objective value.
    atb_cache_median, f64, |c| c.stats().median);
cache_scalar_getter!(
    /// Mean evaluation cost in seconds.
    atb_cache_mean_eval_cost, f64, |c| c.stats().mean_eval_cost);

/// Time budget at which the analytic random-search baseline closes `cutoff`
/// of the median-to-optimum distance.
///
/// # Safety
/// `cache` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn atb_compute_budget(
    cache: *const AtbCache,
    cutoff: f64,
    out: *mut f64,
) -> AtbStatus {
    guarded(|| {
        required_out(out)?;
        let cache = unsafe { required_cache(cache) }?;
        let budget =
            compute_budget(cache, cutoff).map_err(|e| (AtbStatus::Runtime, e.to_string()))?;
        unsafe { *out = budget };
        Ok(())
    })
}

/// Runs `repeats` seeded runs of an algorithm ("name[,key=value...]")
/// against the cache and returns the aggregate performance score and its
/// 95% confidence half-width. `grid_points` of 0 selects the default grid.
///
/// # Safety
/// `cache` must be a live handle, `algorithm` a valid NUL-terminated
/// string, and the out pointers valid or null (null skips that output).
#[no_mangle]
pub unsafe extern "C" fn atb_run_score(
    cache: *const AtbCache,
    algorithm: *const c_char,
    repeats: u32,
    master_seed: u64,
    cutoff: f64,
    grid_points: u32,
    out_score: *mut f64,
    out_ci_half_width: *mut f64,
) -> AtbStatus {
    guarded(|| {
        let cache = unsafe { required_cache(cache) }?;
        let spec: AlgorithmSpec = unsafe { required_str(algorithm) }?
            .parse()
            .map_err(|e: String| (AtbStatus::InvalidArgument, e))?;
        if repeats < 1 {
            return Err((AtbStatus::InvalidArgument, "repeats must be at least 1".into()));
        }
        let runtime = |e: &dyn std::fmt::Display| (AtbStatus::Runtime, e.to_string());
        let budget = compute_budget(cache, cutoff).map_err(|e| runtime(&e))?;
        let grid_points = if grid_points == 0 {
            atbench::methodology::DEFAULT_GRID_POINTS
        } else {
            grid_points as usize
        };
        let grid = TimeGrid::new(budget, grid_points).map_err(|e| runtime(&e))?;
        let baseline = baseline_curve(cache, &grid);
        let mut traces = Vec::with_capacity(repeats as usize);
        for run_id in 0..repeats as u64 {
            traces.push(
                run_optimizer(&spec, cache, budget, master_seed, run_id)
                    .map_err(|e| runtime(&e))?,
            );
        }
        let curve =
            performance_curve(&traces, &baseline, cache.stats().optimum)
                .map_err(|e| runtime(&e))?;
        let mut curves = std::collections::BTreeMap::new();
        curves.insert(cache.cache_id(), curve);
        let report = aggregate(&curves).map_err(|e| runtime(&e))?;
        if !out_score.is_null() {
            unsafe { *out_score = report.score };
        }
        if !out_ci_half_width.is_null() {
            let ci = if repeats >= 2 {
                let scores = curves[&cache.cache_id()].run_scores();
                let mean = scores.iter().sum::<f64>() / scores.len() as f64;
                let var = scores.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>()
                    / (scores.len() - 1) as f64;
                1.96 * var.sqrt() / (scores.len() as f64).sqrt()
            } else {
                0.0
            };
            unsafe { *out_ci_half_width = ci };
        }
        Ok(())
    })
}
