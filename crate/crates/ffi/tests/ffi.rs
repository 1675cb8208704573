//! Exercises the C ABI through the exported functions directly.

use atbench_ffi::*;
use std::ffi::{CStr, CString};
use std::ptr;

fn last_error() -> String {
    let ptr = atb_last_error();
    assert!(!ptr.is_null(), "expected an error message");
    unsafe { CStr::from_ptr(ptr) }.to_str().unwrap().to_string()
}

#[test]
fn version_is_a_static_string() {
    let v = unsafe { CStr::from_ptr(atb_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn synth_load_write_and_stats_round_trip() {
    let kind = CString::new("bowl").unwrap();
    let mut cache: *mut AtbCache = ptr::null_mut();
    let status = unsafe { atb_cache_synth(kind.as_ptr(), 2, 5, 1, &mut cache) };
    assert_eq!(status, AtbStatus::Ok);
    assert!(!cache.is_null());

    let mut cartesian = 0u64;
    let mut constrained = 0u64;
    let mut dims = 0u32;
    let mut optimum = 0.0f64;
    let mut median = 0.0f64;
    let mut cost = 0.0f64;
    unsafe {
        assert_eq!(atb_cache_cartesian_size(cache, &mut cartesian), AtbStatus::Ok);
        assert_eq!(atb_cache_constrained_size(cache, &mut constrained), AtbStatus::Ok);
        assert_eq!(atb_cache_dimension_count(cache, &mut dims), AtbStatus::Ok);
        assert_eq!(atb_cache_optimum(cache, &mut optimum), AtbStatus::Ok);
        assert_eq!(atb_cache_median(cache, &mut median), AtbStatus::Ok);
        assert_eq!(atb_cache_mean_eval_cost(cache, &mut cost), AtbStatus::Ok);
    }
    assert_eq!((cartesian, constrained, dims), (25, 25, 2));
    assert_eq!(optimum, 1.0);
    assert!(median > optimum);
    assert!(cost > 0.0);

    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("bowl.json").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { atb_cache_write(cache, path.as_ptr()) }, AtbStatus::Ok);

    let mut reloaded: *mut AtbCache = ptr::null_mut();
    assert_eq!(
        unsafe { atb_cache_load(path.as_ptr(), &mut reloaded) },
        AtbStatus::Ok
    );
    let mut reloaded_constrained = 0u64;
    unsafe {
        assert_eq!(
            atb_cache_constrained_size(reloaded, &mut reloaded_constrained),
            AtbStatus::Ok
        );
    }
    assert_eq!(reloaded_constrained, 25);

    unsafe {
        atb_cache_free(cache);
        atb_cache_free(reloaded);
        atb_cache_free(ptr::null_mut());
    }
}

#[test]
fn budget_and_score_are_reachable() {
    let kind = CString::new("rugged").unwrap();
    let mut cache: *mut AtbCache = ptr::null_mut();
    assert_eq!(
        unsafe { atb_cache_synth(kind.as_ptr(), 3, 8, 7, &mut cache) },
        AtbStatus::Ok
    );

    let mut budget = 0.0f64;
    assert_eq!(
        unsafe { atb_compute_budget(cache, 0.95, &mut budget) },
        AtbStatus::Ok
    );
    assert!(budget > 0.0);

    let algo = CString::new("random_search").unwrap();
    let mut score = f64::NAN;
    let mut ci = f64::NAN;
    let status = unsafe {
        atb_run_score(cache, algo.as_ptr(), 8, 42, 0.95, 0, &mut score, &mut ci)
    };
    assert_eq!(status, AtbStatus::Ok);
    assert!(score.is_finite());
    assert!(ci >= 0.0);

    // Identical arguments reproduce the score exactly.
    let mut again = f64::NAN;
    let status = unsafe {
        atb_run_score(cache, algo.as_ptr(), 8, 42, 0.95, 0, &mut again, ptr::null_mut())
    };
    assert_eq!(status, AtbStatus::Ok);
    assert_eq!(score, again);

    unsafe { atb_cache_free(cache) };
}

#[test]
fn errors_set_status_and_message() {
    let mut cache: *mut AtbCache = ptr::null_mut();

    let status = unsafe { atb_cache_load(ptr::null(), &mut cache) };
    assert_eq!(status, AtbStatus::NullArgument);
    assert!(last_error().contains("null"));

    let missing = CString::new("/no/such/file.json").unwrap();
    let status = unsafe { atb_cache_load(missing.as_ptr(), &mut cache) };
    assert_eq!(status, AtbStatus::Io);

    let kind = CString::new("volcano").unwrap();
    let status = unsafe { atb_cache_synth(kind.as_ptr(), 2, 5, 1, &mut cache) };
    assert_eq!(status, AtbStatus::InvalidArgument);
    assert!(last_error().contains("volcano"));

    let kind = CString::new("bowl").unwrap();
    let status = unsafe { atb_cache_synth(kind.as_ptr(), 10, 10, 1, &mut cache) };
    assert_eq!(status, AtbStatus::InvalidArgument, "oversized request");

    assert_eq!(
        unsafe { atb_cache_synth(kind.as_ptr(), 2, 5, 1, &mut cache) },
        AtbStatus::Ok
    );
    let algo = CString::new("warp_drive").unwrap();
    let status = unsafe {
        atb_run_score(cache, algo.as_ptr(), 4, 0, 0.95, 0, ptr::null_mut(), ptr::null_mut())
    };
    assert_eq!(status, AtbStatus::Runtime);
    assert!(last_error().contains("warp_drive"));
    unsafe { atb_cache_free(cache) };
}
