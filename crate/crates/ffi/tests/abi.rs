use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use trendlab_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(trendlab_last_error()) }
        .to_string_lossy()
        .into_owned()
}

fn two_node() -> *mut TrendlabHistory {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/two_node.tsv");
    let path = CString::new(path.to_str().unwrap()).unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(
        unsafe { trendlab_history_load(path.as_ptr(), &mut h) },
        TrendlabStatus::Ok
    );
    assert!(!h.is_null());
    h
}

fn scores(s: *const TrendlabScores) -> Vec<(String, f64)> {
    let len = unsafe { trendlab_scores_len(s) };
    (0..len)
        .map(|i| {
            let mut node: *const c_char = ptr::null();
            let mut v = f64::NAN;
            assert_eq!(
                unsafe { trendlab_scores_get(s, i, &mut node, &mut v) },
                TrendlabStatus::Ok
            );
            (
                unsafe { CStr::from_ptr(node) }.to_str().unwrap().to_owned(),
                v,
            )
        })
        .collect()
}

#[test]
fn rbdm_through_the_c_abi() {
    let h = two_node();
    let mut s = ptr::null_mut();
    let status =
        unsafe { trendlab_score(h, TrendlabPredictor::Rbdm, 500, 30, ptr::null(), &mut s) };
    assert_eq!(status, TrendlabStatus::Ok);
    assert_eq!(
        scores(s),
        [("a".to_string(), 0.75), ("b".to_string(), 0.425)]
    );
    let mut node: *const c_char = ptr::null();
    let mut v = 0.0;
    assert_eq!(
        unsafe { trendlab_scores_get(s, 2, &mut node, &mut v) },
        TrendlabStatus::OutOfRange
    );
    unsafe {
        trendlab_scores_free(s);
        trendlab_history_free(h);
    }
}

#[test]
fn history_queries() {
    let h = two_node();
    let (mut n, mut lo, mut hi) = (0usize, 0i64, 0i64);
    assert_eq!(
        unsafe { trendlab_history_info(h, &mut n, &mut lo, &mut hi) },
        TrendlabStatus::Ok
    );
    assert_eq!((n, lo, hi), (12, 100, 500));

    let a = CString::new("a").unwrap();
    let mut k = 0u64;
    let count =
        |kind, t, w, out: &mut u64| unsafe { trendlab_count(h, kind, a.as_ptr(), t, w, out) };
    assert_eq!(
        count(TrendlabCount::DegreeAt, 500, 0, &mut k),
        TrendlabStatus::Ok
    );
    assert_eq!(k, 4);
    assert_eq!(
        count(TrendlabCount::WindowGain, 500, 30, &mut k),
        TrendlabStatus::Ok
    );
    assert_eq!(k, 3);
    assert_eq!(
        count(TrendlabCount::FutureGain, 100, 400, &mut k),
        TrendlabStatus::Ok
    );
    assert_eq!(k, 3);
    assert_eq!(
        count(TrendlabCount::WindowGain, 500, 0, &mut k),
        TrendlabStatus::InvalidArgument
    );

    let mut aged = 0.0;
    assert_eq!(
        unsafe { trendlab_aged_degree(h, a.as_ptr(), 500, 0.0, &mut aged) },
        TrendlabStatus::Ok
    );
    assert_eq!(aged, 4.0);

    let missing = CString::new("zzz").unwrap();
    assert_eq!(
        unsafe { trendlab_count(h, TrendlabCount::DegreeAt, missing.as_ptr(), 0, 0, &mut k) },
        TrendlabStatus::UnknownNode
    );
    assert!(last_error().contains("zzz"));
    unsafe { trendlab_history_free(h) };
}

#[test]
fn history_from_arrays_and_params() {
    let ids: Vec<CString> = ["u", "v", "a", "b"]
        .iter()
        .map(|s| CString::new(*s).unwrap())
        .collect();
    let sources = [ids[0].as_ptr(), ids[1].as_ptr(), ids[0].as_ptr()];
    let targets = [ids[2].as_ptr(), ids[2].as_ptr(), ids[3].as_ptr()];
    let times = [1i64, 5, 3];
    let mut h = ptr::null_mut();
    let status = unsafe {
        trendlab_history_from_events(
            sources.as_ptr(),
            targets.as_ptr(),
            times.as_ptr(),
            3,
            &mut h,
        )
    };
    assert_eq!(status, TrendlabStatus::Ok);

    let mut params = TrendlabParams {
        lambda: 0.0,
        gamma: 0.0,
        teleport: 0.0,
        pagerank_tol: 0.0,
        pagerank_max_iters: 0,
    };
    assert_eq!(
        unsafe { trendlab_params_default(&mut params) },
        TrendlabStatus::Ok
    );
    assert_eq!(params.lambda, 0.98);
    assert_eq!(params.teleport, 0.9);

    let mut s = ptr::null_mut();
    assert_eq!(
        unsafe { trendlab_score(h, TrendlabPredictor::Indegree, 5, 30, &params, &mut s) },
        TrendlabStatus::Ok
    );
    assert_eq!(scores(s), [("a".to_string(), 2.0), ("b".to_string(), 1.0)]);
    unsafe { trendlab_scores_free(s) };

    params.teleport = 1.5;
    let mut s = ptr::null_mut();
    assert_eq!(
        unsafe { trendlab_score(h, TrendlabPredictor::Pagerank, 5, 30, &params, &mut s) },
        TrendlabStatus::InvalidArgument
    );
    assert!(s.is_null());
    assert!(!last_error().is_empty());

    assert_eq!(
        unsafe { trendlab_score(h, TrendlabPredictor::Tbp, 0, 30, ptr::null(), &mut s) },
        TrendlabStatus::NoEligibleNodes
    );
    unsafe { trendlab_history_free(h) };
}

#[test]
fn rejects_bad_input() {
    let mut h = ptr::null_mut();
    assert_eq!(
        unsafe { trendlab_history_load(ptr::null(), &mut h) },
        TrendlabStatus::NullPointer
    );
    let missing = CString::new("/nonexistent/events.tsv").unwrap();
    assert_eq!(
        unsafe { trendlab_history_load(missing.as_ptr(), &mut h) },
        TrendlabStatus::Io
    );
    assert!(h.is_null());

    let self_link = CString::new("x").unwrap();
    let ptrs = [self_link.as_ptr()];
    let times = [0i64];
    assert_eq!(
        unsafe {
            trendlab_history_from_events(ptrs.as_ptr(), ptrs.as_ptr(), times.as_ptr(), 1, &mut h)
        },
        TrendlabStatus::Parse
    );
    assert_eq!(
        unsafe {
            trendlab_history_from_events(ptrs.as_ptr(), ptrs.as_ptr(), times.as_ptr(), 0, &mut h)
        },
        TrendlabStatus::EmptyDataset
    );
    let bad_utf8 = [0xffu8, 0];
    let bad = [bad_utf8.as_ptr().cast::<c_char>()];
    let good = [self_link.as_ptr()];
    assert_eq!(
        unsafe {
            trendlab_history_from_events(bad.as_ptr(), good.as_ptr(), times.as_ptr(), 1, &mut h)
        },
        TrendlabStatus::InvalidUtf8
    );
    assert_eq!(unsafe { trendlab_scores_len(ptr::null()) }, 0);
    unsafe {
        trendlab_history_free(ptr::null_mut());
        trendlab_scores_free(ptr::null_mut());
    }
}

#[test]
fn kendall_tau_and_version() {
    let x = [1.0, 2.0, 3.0];
    let y = [1.0, 3.0, 2.0];
    let mut tau = 0.0;
    assert_eq!(
        unsafe { trendlab_kendall_tau(x.as_ptr(), y.as_ptr(), 3, &mut tau) },
        TrendlabStatus::Ok
    );
    assert!((tau - 1.0 / 3.0).abs() < 1e-15);
    assert_eq!(
        unsafe { trendlab_kendall_tau(x.as_ptr(), y.as_ptr(), 1, &mut tau) },
        TrendlabStatus::InvalidArgument
    );
    let v = unsafe { CStr::from_ptr(trendlab_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/trendlab.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "trendlab_score",
        "trendlab_history_load",
        "TrendlabStatus",
        "typedef struct TrendlabHistory TrendlabHistory",
    ] {
        assert!(text.contains(name), "header lacks {name}");
    }
    let Ok(out) = Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c"])
        .arg(&header)
        .output()
    else {
        eprintln!("no C compiler found, skipping syntax check");
        return;
    };
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}
