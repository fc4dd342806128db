//! C ABI for trendlab.
//!
//! Handles are opaque pointers created by `*_load`/`*_from_*`/`trendlab_score`
//! and released with the matching `*_free`. Every fallible call returns a
//! [`TrendlabStatus`]; on failure [`trendlab_last_error`] describes the cause
//! for the calling thread. Outputs are written through pointer arguments only
//! on success.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use trendlab::graph::{DegreeHistory, LinkEvent};
use trendlab::metrics::{kendall_tau, top_n};
use trendlab::predictors::{self, PredictorKind, PredictorParams};
use trendlab::{ingest, Error};

#[repr(C)]
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum TrendlabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    EmptyDataset = 5,
    UnknownNode = 6,
    InvalidArgument = 7,
    NoEligibleNodes = 8,
    NotConverged = 9,
    OutOfRange = 10,
    Panic = 99,
}

#[repr(C)]
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum TrendlabPredictor {
    Indegree = 0,
    Pagerank = 1,
    Pbp = 2,
    Tbp = 3,
    Rbdm = 4,
    Rbndm = 5,
}

impl From<TrendlabPredictor> for PredictorKind {
    fn from(p: TrendlabPredictor) -> Self {
        match p {
            TrendlabPredictor::Indegree => PredictorKind::Indegree,
            TrendlabPredictor::Pagerank => PredictorKind::Pagerank,
            TrendlabPredictor::Pbp => PredictorKind::Pbp,
            TrendlabPredictor::Tbp => PredictorKind::Tbp,
            TrendlabPredictor::Rbdm => PredictorKind::Rbdm,
            TrendlabPredictor::Rbndm => PredictorKind::Rbndm,
        }
    }
}

/// Predictor parameters. Fill with [`trendlab_params_default`] first.
#[repr(C)]
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct TrendlabParams {
    pub lambda: f64,
    pub gamma: f64,
    pub teleport: f64,
    pub pagerank_tol: f64,
    pub pagerank_max_iters: u32,
}

impl From<PredictorParams> for TrendlabParams {
    fn from(p: PredictorParams) -> Self {
        TrendlabParams {
            lambda: p.lambda,
            gamma: p.gamma,
            teleport: p.teleport,
            pagerank_tol: p.pagerank_tol,
            pagerank_max_iters: p.pagerank_max_iters.min(u32::MAX as usize) as u32,
        }
    }
}

impl From<TrendlabParams> for PredictorParams {
    fn from(p: TrendlabParams) -> Self {
        PredictorParams {
            lambda: p.lambda,
            gamma: p.gamma,
            teleport: p.teleport,
            pagerank_tol: p.pagerank_tol,
            pagerank_max_iters: p.pagerank_max_iters as usize,
        }
    }
}

/// Opaque event history.
pub struct TrendlabHistory {
    inner: DegreeHistory,
}

/// Opaque ranked score list (score descending, node id ascending).
pub struct TrendlabScores {
    nodes: Vec<CString>,
    scores: Vec<f64>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> TrendlabStatus {
    match e {
        Error::EmptyDataset => TrendlabStatus::EmptyDataset,
        Error::UnknownNode(_) => TrendlabStatus::UnknownNode,
        Error::NoEligibleNodes(_) => TrendlabStatus::NoEligibleNodes,
        Error::NotConverged { .. } => TrendlabStatus::NotConverged,
        Error::Io { .. } => TrendlabStatus::Io,
        Error::Malformed { .. } | Error::InvalidEvent { .. } | Error::TooManyRejected { .. } => {
            TrendlabStatus::Parse
        }
        Error::OutOfSpan { .. } | Error::SpanTooSmall { .. } => TrendlabStatus::OutOfRange,
        _ => TrendlabStatus::InvalidArgument,
    }
}

struct Fail(TrendlabStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(TrendlabStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, translating errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> TrendlabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            TrendlabStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            TrendlabStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(TrendlabStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn history<'a>(h: *const TrendlabHistory) -> Result<&'a DegreeHistory, Fail> {
    h.as_ref().map(|h| &h.inner).ok_or_else(|| null("history"))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn trendlab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread; empty after a success.
/// Valid until the next trendlab call on the same thread.
#[no_mangle]
pub extern "C" fn trendlab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `out` must be a valid pointer to a `TrendlabParams`.
#[no_mangle]
pub unsafe extern "C" fn trendlab_params_default(out: *mut TrendlabParams) -> TrendlabStatus {
    guard(|| write_out(out, PredictorParams::default().into()))
}

/// Loads a canonical `source\ttarget\ttime` event file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn trendlab_history_load(
    path: *const c_char,
    out: *mut *mut TrendlabHistory,
) -> TrendlabStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let events = ingest::read_canonical(path)?;
        let inner = DegreeHistory::build(&events)?;
        write_out(out, Box::into_raw(Box::new(TrendlabHistory { inner })))
    })
}

/// Builds a history from `len` parallel arrays of events.
///
/// # Safety
/// `sources` and `targets` must point to `len` NUL-terminated strings,
/// `times` to `len` integers, and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn trendlab_history_from_events(
    sources: *const *const c_char,
    targets: *const *const c_char,
    times: *const i64,
    len: usize,
    out: *mut *mut TrendlabHistory,
) -> TrendlabStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("output pointer"));
        }
        if len == 0 {
            return Err(Error::EmptyDataset.into());
        }
        if sources.is_null() || targets.is_null() || times.is_null() {
            return Err(null("event array"));
        }
        let mut events = Vec::with_capacity(len);
        for i in 0..len {
            let s = str_arg(*sources.add(i), "source id")?;
            let t = str_arg(*targets.add(i), "target id")?;
            events.push(LinkEvent::new(s, t, *times.add(i)));
        }
        let inner = DegreeHistory::build(&events)?;
        write_out(out, Box::into_raw(Box::new(TrendlabHistory { inner })))
    })
}

/// # Safety
/// `h` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn trendlab_history_free(h: *mut TrendlabHistory) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Writes node count, first and last event time.
///
/// # Safety
/// `h` must be a live handle; output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn trendlab_history_info(
    h: *const TrendlabHistory,
    node_count: *mut usize,
    t_min: *mut i64,
    t_max: *mut i64,
) -> TrendlabStatus {
    guard(|| {
        let h = history(h)?;
        if node_count.is_null() || t_min.is_null() || t_max.is_null() {
            return Err(null("output pointer"));
        }
        write_out(node_count, h.node_count())?;
        write_out(t_min, h.t_min())?;
        write_out(t_max, h.t_max())
    })
}

/// Which windowed count [`trendlab_count`] returns.
#[repr(C)]
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum TrendlabCount {
    /// Receipts at or before `t` (`window` ignored).
    DegreeAt = 0,
    /// Receipts in `(t - window, t]`.
    WindowGain = 1,
    /// Receipts in `(t, t + window]`.
    FutureGain = 2,
}

/// # Safety
/// `h` must be a live handle, `node` a NUL-terminated string and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn trendlab_count(
    h: *const TrendlabHistory,
    kind: TrendlabCount,
    node: *const c_char,
    t: i64,
    window: i64,
    out: *mut u64,
) -> TrendlabStatus {
    guard(|| {
        let h = history(h)?;
        let o = h.lookup(str_arg(node, "node")?)?;
        if kind != TrendlabCount::DegreeAt && window <= 0 {
            return Err(Fail(
                TrendlabStatus::InvalidArgument,
                "window must be positive".into(),
            ));
        }
        let v = match kind {
            TrendlabCount::DegreeAt => h.degree_at(o, t),
            TrendlabCount::WindowGain => h.window_gain(o, t, window),
            TrendlabCount::FutureGain => h.future_gain(o, t, window),
        };
        write_out(out, v as u64)
    })
}

/// # Safety
/// As [`trendlab_count`].
#[no_mangle]
pub unsafe extern "C" fn trendlab_aged_degree(
    h: *const TrendlabHistory,
    node: *const c_char,
    t: i64,
    gamma: f64,
    out: *mut f64,
) -> TrendlabStatus {
    guard(|| {
        let h = history(h)?;
        let o = h.lookup(str_arg(node, "node")?)?;
        if gamma.is_nan() || gamma < 0.0 {
            return Err(Fail(
                TrendlabStatus::InvalidArgument,
                "gamma must be >= 0".into(),
            ));
        }
        write_out(out, h.aged_degree(o, t, gamma))
    })
}

/// Scores every node eligible at `t`. `params` may be null for defaults.
///
/// # Safety
/// `h` must be a live handle, `params` null or valid, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn trendlab_score(
    h: *const TrendlabHistory,
    predictor: TrendlabPredictor,
    t: i64,
    tp: i64,
    params: *const TrendlabParams,
    out: *mut *mut TrendlabScores,
) -> TrendlabStatus {
    guard(|| {
        let h = history(h)?;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let params: PredictorParams = params.as_ref().map(|p| (*p).into()).unwrap_or_default();
        let sv = predictors::score(h, predictor.into(), t, tp, &params)?;
        let ranked = top_n(&sv.scores, sv.len());
        let mut nodes = Vec::with_capacity(ranked.len());
        let mut scores = Vec::with_capacity(ranked.len());
        for (o, s) in ranked.entries {
            nodes.push(CString::new(h.name(o)).map_err(|_| null("node id"))?);
            scores.push(s);
        }
        write_out(
            out,
            Box::into_raw(Box::new(TrendlabScores { nodes, scores })),
        )
    })
}

/// Number of entries; 0 for a null handle.
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn trendlab_scores_len(s: *const TrendlabScores) -> usize {
    s.as_ref().map_or(0, |s| s.scores.len())
}

/// Entry `index` in rank order. The node string lives as long as `s`.
///
/// # Safety
/// `s` must be a live handle; output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn trendlab_scores_get(
    s: *const TrendlabScores,
    index: usize,
    node: *mut *const c_char,
    score: *mut f64,
) -> TrendlabStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("scores"))?;
        if node.is_null() || score.is_null() {
            return Err(null("output pointer"));
        }
        if index >= s.scores.len() {
            return Err(Fail(
                TrendlabStatus::OutOfRange,
                format!("index {index} out of {} entries", s.scores.len()),
            ));
        }
        write_out(node, s.nodes[index].as_ptr())?;
        write_out(score, s.scores[index])
    })
}

/// # Safety
/// `s` must be null or a handle from [`trendlab_score`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn trendlab_scores_free(s: *mut TrendlabScores) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Kendall's tau over `len` paired values; tied pairs are excluded.
///
/// # Safety
/// `x` and `y` must point to `len` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn trendlab_kendall_tau(
    x: *const f64,
    y: *const f64,
    len: usize,
    out: *mut f64,
) -> TrendlabStatus {
    guard(|| {
        if x.is_null() || y.is_null() {
            return Err(null("input array"));
        }
        let (x, y) = (
            std::slice::from_raw_parts(x, len),
            std::slice::from_raw_parts(y, len),
        );
        write_out(out, kendall_tau(x, y)?)
    })
}
