//! C ABI for trollscope.
//!
//! Every fallible call returns a [`TsStatus`]; on failure the message is
//! available from [`ts_last_error_message`] on the same thread. Handles are
//! opaque and must be released with their `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use trollscope::corpus::{load_corpus, Corpus, DEFAULT_TIMEZONE};
use trollscope::error::Error;
use trollscope::experiments::compute_metrics;
use trollscope::svm::{rbf, SvmModel};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    /// Malformed or inconsistent input data.
    Data = 4,
    DimensionMismatch = 5,
    UnknownUser = 6,
    Panic = 7,
}

pub struct TsCorpus {
    inner: Corpus,
}

pub struct TsModel {
    inner: SvmModel,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TsCorpusCounts {
    pub publications: usize,
    pub comments: usize,
    pub replies: usize,
    pub users: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TsActivityStats {
    pub total_comments: u64,
    pub days_in_forum: u64,
    pub active_days: u64,
    pub multi_comment_days: u64,
    pub publications_commented: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TsMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> TsStatus {
    match e {
        Error::Io { .. } => TsStatus::Io,
        Error::DimensionMismatch { .. } | Error::LengthMismatch { .. } => TsStatus::DimensionMismatch,
        Error::UnknownUser(_) => TsStatus::UnknownUser,
        Error::InvalidConfig(_) | Error::UnknownTimezone(_) => TsStatus::InvalidArgument,
        _ => TsStatus::Data,
    }
}

/// Runs `f`, records its error or panic, and maps the outcome to a status.
fn guard(f: impl FnOnce() -> Result<(), (TsStatus, String)>) -> TsStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TsStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            TsStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (TsStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (TsStatus, String) {
    (TsStatus::NullPointer, format!("{what} is null"))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (TsStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| (TsStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], (TsStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (TsStatus, String)> {
    unsafe { p.as_mut() }.ok_or_else(|| null(what))
}

/// Loads a corpus directory. `timezone` may be null for Europe/Sofia.
///
/// # Safety
/// `dir` and a non-null `timezone` must be NUL-terminated strings; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn ts_corpus_load(dir: *const c_char, timezone: *const c_char, out: *mut *mut TsCorpus) -> TsStatus {
    guard(|| {
        let out = unsafe { out_ref(out, "out") }?;
        *out = ptr::null_mut();
        let dir = unsafe { c_str(dir, "dir") }?;
        let tz = if timezone.is_null() { DEFAULT_TIMEZONE } else { unsafe { c_str(timezone, "timezone") }? };
        let corpus = load_corpus(dir, tz).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(TsCorpus { inner: corpus }));
        Ok(())
    })
}

/// # Safety
/// `corpus` must be null or a handle from [`ts_corpus_load`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ts_corpus_free(corpus: *mut TsCorpus) {
    if !corpus.is_null() {
        drop(unsafe { Box::from_raw(corpus) });
    }
}

/// # Safety
/// `corpus` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ts_corpus_counts(corpus: *const TsCorpus, out: *mut TsCorpusCounts) -> TsStatus {
    guard(|| {
        let c = unsafe { corpus.as_ref() }.ok_or_else(|| null("corpus"))?;
        let out = unsafe { out_ref(out, "out") }?;
        let n = c.inner.counts();
        *out = TsCorpusCounts {
            publications: n.publications,
            comments: n.comments,
            replies: n.replies,
            users: n.users,
        };
        Ok(())
    })
}

/// # Safety
/// `corpus` must be a live handle, `user_id` a NUL-terminated string and
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ts_corpus_activity_stats(
    corpus: *const TsCorpus,
    user_id: *const c_char,
    out: *mut TsActivityStats,
) -> TsStatus {
    guard(|| {
        let c = unsafe { corpus.as_ref() }.ok_or_else(|| null("corpus"))?;
        let id = unsafe { c_str(user_id, "user_id") }?;
        let out = unsafe { out_ref(out, "out") }?;
        let s = c.inner.activity_stats(id).map_err(lib_err)?;
        *out = TsActivityStats {
            total_comments: s.total_comments,
            days_in_forum: s.days_in_forum,
            active_days: s.active_days,
            multi_comment_days: s.multi_comment_days,
            publications_commented: s.publications_commented,
        };
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ts_model_load(path: *const c_char, out: *mut *mut TsModel) -> TsStatus {
    guard(|| {
        let out = unsafe { out_ref(out, "out") }?;
        *out = ptr::null_mut();
        let path = unsafe { c_str(path, "path") }?;
        let model = SvmModel::load(path).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(TsModel { inner: model }));
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle from [`ts_model_load`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ts_model_free(model: *mut TsModel) {
    if !model.is_null() {
        drop(unsafe { Box::from_raw(model) });
    }
}

/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ts_model_n_features(model: *const TsModel, out: *mut usize) -> TsStatus {
    guard(|| {
        let m = unsafe { model.as_ref() }.ok_or_else(|| null("model"))?;
        *unsafe { out_ref(out, "out") }? = m.inner.dimension();
        Ok(())
    })
}

/// Classifies one raw feature row. `label` receives +1 or -1; `decision`
/// may be null.
///
/// # Safety
/// `row` must point to `len` doubles; `label` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ts_model_predict(
    model: *const TsModel,
    row: *const f64,
    len: usize,
    label: *mut i8,
    decision: *mut f64,
) -> TsStatus {
    guard(|| {
        let m = unsafe { model.as_ref() }.ok_or_else(|| null("model"))?;
        let row = unsafe { slice(row, len, "row") }?;
        let label = unsafe { out_ref(label, "label") }?;
        let p = m.inner.predict(row).map_err(lib_err)?;
        *label = p.label;
        if let Some(d) = unsafe { decision.as_mut() } {
            *d = p.decision;
        }
        Ok(())
    })
}

/// # Safety
/// `predictions` and `gold` must each point to `n` values; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ts_compute_metrics(
    predictions: *const i8,
    gold: *const i8,
    n: usize,
    positive_label: i8,
    out: *mut TsMetrics,
) -> TsStatus {
    guard(|| {
        let p = unsafe { slice(predictions, n, "predictions") }?;
        let g = unsafe { slice(gold, n, "gold") }?;
        let out = unsafe { out_ref(out, "out") }?;
        let m = compute_metrics(p, g, positive_label).map_err(lib_err)?;
        *out = TsMetrics {
            accuracy: m.accuracy,
            precision: m.precision,
            recall: m.recall,
            f_score: m.f_score,
            tp: m.tp,
            fp: m.fp,
            fn_: m.fn_,
            tn: m.tn,
        };
        Ok(())
    })
}

/// `exp(-gamma * |x - z|^2)` for two vectors of length `n`.
///
/// # Safety
/// `x` and `z` must point to `n` doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ts_rbf(x: *const f64, z: *const f64, n: usize, gamma: f64, out: *mut f64) -> TsStatus {
    guard(|| {
        let x = unsafe { slice(x, n, "x") }?;
        let z = unsafe { slice(z, n, "z") }?;
        let out = unsafe { out_ref(out, "out") }?;
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err((TsStatus::InvalidArgument, "gamma must be positive and finite".into()));
        }
        *out = rbf(x, z, gamma).map_err(lib_err)?;
        Ok(())
    })
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn ts_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ts_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
