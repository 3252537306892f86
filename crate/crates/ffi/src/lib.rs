//! C ABI over the boostlab library.
//!
//! Objects are opaque handles created by `bl_*_new`-style functions and
//! released with the matching `bl_*_free`. Every fallible call returns a
//! [`BlStatus`]; on failure `bl_last_error` describes the most recent error
//! on the calling thread. Strings returned through `char **` belong to the
//! caller and are released with [`bl_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use boostlab::booster::TerminalStatus;
use boostlab::{
    decompose, parse_dataset, run, BoostTrace, Combination, Decomposition, Error, FeatureMatrix,
    Variant,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    Parse = 4,
    PerfectSeparation = 5,
    Numerical = 6,
    NotFound = 7,
    OracleRefused = 8,
    Internal = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlVariant {
    Plain = 0,
    Scaled = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlRunStatus {
    Completed = 0,
    PerfectSeparation = 1,
    TargetReached = 2,
}

/// One boosting round. Optional fields are NaN when absent.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlRound {
    pub t: usize,
    pub j: usize,
    pub r: f64,
    pub delta: f64,
    pub alpha: f64,
    pub loss: f64,
    pub l1_norm: f64,
    pub scale: f64,
    pub loss_z: f64,
    pub loss_f: f64,
}

/// Opaque feature matrix.
pub struct BlMatrix(FeatureMatrix);
/// Opaque boosting trace.
pub struct BlTrace(BoostTrace);
/// Opaque decomposition.
pub struct BlDecomposition(Decomposition);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> BlStatus {
    match e {
        Error::DimensionMismatch { .. } => BlStatus::DimensionMismatch,
        Error::InvalidMatrix(_) | Error::InvalidExampleSet(_) | Error::InvalidArgument(_) => {
            BlStatus::InvalidArgument
        }
        Error::Parse { .. } => BlStatus::Parse,
        Error::PerfectSeparation { .. } => BlStatus::PerfectSeparation,
        Error::ZeroLoss | Error::NonFinite(_) | Error::Lp(_) | Error::NoConvergence { .. } => {
            BlStatus::Numerical
        }
        Error::NotFound(_) => BlStatus::NotFound,
        Error::OracleRefused(_) => BlStatus::OracleRefused,
        Error::Inconsistent(_) => BlStatus::Internal,
    }
}

/// Runs `f`, mapping library errors and panics to status codes.
fn guard(f: impl FnOnce() -> Result<(), BlStatus>) -> BlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            BlStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            BlStatus::Internal
        }
    }
}

fn fail(e: Error) -> BlStatus {
    set_error(&e.to_string());
    status_of(&e)
}

fn null(what: &str) -> BlStatus {
    set_error(&format!("null pointer: {what}"));
    BlStatus::NullPointer
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, BlStatus> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut *mut T, v: T) {
    *out = Box::into_raw(Box::new(v));
}

/// Message for the last failed call on this thread; empty after a success.
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn bl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn bl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn bl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), BlStatus> {
    let c = CString::new(s).map_err(|_| {
        set_error("string contains NUL");
        BlStatus::Internal
    })?;
    *out = c.into_raw();
    Ok(())
}

/// Builds a `rows x cols` matrix from row-major `entries` in `[-1, 1]`.
///
/// # Safety
/// `entries` must point to `rows * cols` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bl_matrix_new(
    rows: usize,
    cols: usize,
    entries: *const f64,
    out: *mut *mut BlMatrix,
) -> BlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if entries.is_null() && rows * cols > 0 {
            return Err(null("entries"));
        }
        let data = if rows * cols == 0 {
            Vec::new()
        } else {
            std::slice::from_raw_parts(entries, rows * cols).to_vec()
        };
        let m = FeatureMatrix::new(rows, cols, data).map_err(fail)?;
        put(out, BlMatrix(m));
        Ok(())
    })
}

/// Builds a matrix from a dataset name such as `three-example`,
/// `triangular:5` or `file:PATH`.
///
/// # Safety
/// `source` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bl_matrix_from_dataset(
    source: *const c_char,
    seed: u64,
    out: *mut *mut BlMatrix,
) -> BlStatus {
    guard(|| {
        if source.is_null() {
            return Err(null("source"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let s = CStr::from_ptr(source).to_str().map_err(|_| {
            set_error("source is not UTF-8");
            BlStatus::InvalidArgument
        })?;
        let inst = parse_dataset(s, seed).map_err(fail)?;
        put(out, BlMatrix(inst.matrix));
        Ok(())
    })
}

/// Number of rows, or 0 for null.
///
/// # Safety
/// `m` must be null or a live matrix handle.
#[no_mangle]
pub unsafe extern "C" fn bl_matrix_rows(m: *const BlMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.rows())
}

/// Number of columns, or 0 for null.
///
/// # Safety
/// `m` must be null or a live matrix handle.
#[no_mangle]
pub unsafe extern "C" fn bl_matrix_cols(m: *const BlMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.cols())
}

/// # Safety
/// `m` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bl_matrix_free(m: *mut BlMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Normalized exponential loss of `weights` (length `cols`).
///
/// # Safety
/// `weights` must point to `cols` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bl_exp_loss(
    m: *const BlMatrix,
    weights: *const f64,
    len: usize,
    out: *mut f64,
) -> BlStatus {
    guard(|| {
        let m = deref(m, "matrix")?;
        if weights.is_null() && len > 0 {
            return Err(null("weights"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let w = if len == 0 {
            Vec::new()
        } else {
            std::slice::from_raw_parts(weights, len).to_vec()
        };
        *out = boostlab::exp_loss(&m.0, &Combination(w)).map_err(fail)?;
        Ok(())
    })
}

/// Runs up to `rounds` rounds. `stop_loss` ends the run once the loss is at
/// most that value; pass NaN for no target. A run that halts on perfect
/// separation still returns `Ok` with a trace; check `bl_trace_status`.
///
/// # Safety
/// `m` must be a live matrix handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bl_run(
    m: *const BlMatrix,
    rounds: usize,
    variant: BlVariant,
    stop_loss: f64,
    out: *mut *mut BlTrace,
) -> BlStatus {
    guard(|| {
        let m = deref(m, "matrix")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let v = match variant {
            BlVariant::Plain => Variant::Plain,
            BlVariant::Scaled => Variant::Scaled,
        };
        let stop = (!stop_loss.is_nan()).then_some(stop_loss);
        let tr = run(&m.0, rounds, v, stop, None).map_err(fail)?;
        put(out, BlTrace(tr));
        Ok(())
    })
}

/// Rounds completed, or 0 for null.
///
/// # Safety
/// `t` must be null or a live trace handle.
#[no_mangle]
pub unsafe extern "C" fn bl_trace_len(t: *const BlTrace) -> usize {
    t.as_ref().map_or(0, |t| t.0.len())
}

/// # Safety
/// `t` must be a live trace handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bl_trace_status(t: *const BlTrace, out: *mut BlRunStatus) -> BlStatus {
    guard(|| {
        let t = deref(t, "trace")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = match t.0.status {
            TerminalStatus::Completed => BlRunStatus::Completed,
            TerminalStatus::PerfectSeparation => BlRunStatus::PerfectSeparation,
            TerminalStatus::TargetReached => BlRunStatus::TargetReached,
        };
        Ok(())
    })
}

/// Loss after round `t` (`t = 0` is the initial loss).
///
/// # Safety
/// `tr` must be a live trace handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bl_trace_loss(tr: *const BlTrace, t: usize, out: *mut f64) -> BlStatus {
    guard(|| {
        let tr = deref(tr, "trace")?;
        if out.is_null() {
            return Err(null("out"));
        }
        if t > tr.0.len() {
            set_error(&format!("round {t} beyond trace length {}", tr.0.len()));
            return Err(BlStatus::InvalidArgument);
        }
        *out = tr.0.loss_at(t);
        Ok(())
    })
}

/// Record of round `t`, `1 <= t <= len`.
///
/// # Safety
/// `tr` must be a live trace handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bl_trace_round(tr: *const BlTrace, t: usize, out: *mut BlRound) -> BlStatus {
    guard(|| {
        let tr = deref(tr, "trace")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let rec = t
            .checked_sub(1)
            .and_then(|k| tr.0.records.get(k))
            .ok_or_else(|| {
                set_error(&format!("round {t} outside 1..={}", tr.0.len()));
                BlStatus::InvalidArgument
            })?;
        *out = BlRound {
            t: rec.t,
            j: rec.j,
            r: rec.r,
            delta: rec.delta,
            alpha: rec.alpha,
            loss: rec.loss,
            l1_norm: rec.l1_norm,
            scale: rec.scale,
            loss_z: rec.loss_z.unwrap_or(f64::NAN),
            loss_f: rec.loss_f.unwrap_or(f64::NAN),
        };
        Ok(())
    })
}

/// Copies the final combination into `buf`, which holds `len` doubles;
/// `len` must equal the number of columns.
///
/// # Safety
/// `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn bl_trace_weights(tr: *const BlTrace, buf: *mut f64, len: usize) -> BlStatus {
    guard(|| {
        let tr = deref(tr, "trace")?;
        let w = tr.0.final_weights.as_slice();
        if len != w.len() {
            return Err(fail(Error::DimensionMismatch {
                expected: w.len(),
                got: len,
            }));
        }
        if buf.is_null() && len > 0 {
            return Err(null("buf"));
        }
        if len > 0 {
            std::slice::from_raw_parts_mut(buf, len).copy_from_slice(w);
        }
        Ok(())
    })
}

/// The trace as CSV; release with `bl_string_free`.
///
/// # Safety
/// `tr` must be a live trace handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bl_trace_csv(tr: *const BlTrace, out: *mut *mut c_char) -> BlStatus {
    guard(|| {
        let tr = deref(tr, "trace")?;
        if out.is_null() {
            return Err(null("out"));
        }
        put_string(out, tr.0.to_csv(None))
    })
}

/// # Safety
/// `t` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bl_trace_free(t: *mut BlTrace) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Zero-loss/finite-loss decomposition of `m`.
///
/// # Safety
/// `m` must be a live matrix handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bl_decompose(
    m: *const BlMatrix,
    seed: u64,
    out: *mut *mut BlDecomposition,
) -> BlStatus {
    guard(|| {
        let m = deref(m, "matrix")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let d = decompose(&m.0, seed).map_err(fail)?;
        put(out, BlDecomposition(d));
        Ok(())
    })
}

/// Size of the zero-loss set, or 0 for null.
///
/// # Safety
/// `d` must be null or a live decomposition handle.
#[no_mangle]
pub unsafe extern "C" fn bl_decomposition_zero_count(d: *const BlDecomposition) -> usize {
    d.as_ref().map_or(0, |d| d.0.z.len())
}

/// Whether example `i` is in the zero-loss set.
///
/// # Safety
/// `d` must be null or a live decomposition handle.
#[no_mangle]
pub unsafe extern "C" fn bl_decomposition_in_zero_set(d: *const BlDecomposition, i: usize) -> bool {
    d.as_ref().is_some_and(|d| d.0.z.contains(i))
}

/// Margin certificate `gamma`; `NotFound` when the zero-loss set is empty.
///
/// # Safety
/// `d` must be a live decomposition handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bl_decomposition_gamma(d: *const BlDecomposition, out: *mut f64) -> BlStatus {
    guard(|| {
        let d = deref(d, "decomposition")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = d
            .0
            .gamma
            .ok_or_else(|| fail(Error::NotFound("empty zero-loss set has no certificate".into())))?;
        Ok(())
    })
}

/// Minimal unnormalized loss on the finite set.
///
/// # Safety
/// `d` must be a live decomposition handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bl_decomposition_finite_loss(d: *const BlDecomposition, out: *mut f64) -> BlStatus {
    guard(|| {
        let d = deref(d, "decomposition")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = d.0.k_f;
        Ok(())
    })
}

/// Full JSON report; `m` must be the matrix that was decomposed.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bl_decomposition_json(
    d: *const BlDecomposition,
    m: *const BlMatrix,
    out: *mut *mut c_char,
) -> BlStatus {
    guard(|| {
        let d = deref(d, "decomposition")?;
        let m = deref(m, "matrix")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let rows = d.0.z.len() + d.0.f.len();
        if rows != m.0.rows() {
            return Err(fail(Error::DimensionMismatch {
                expected: rows,
                got: m.0.rows(),
            }));
        }
        put_string(out, d.0.report(&m.0, None).to_string())
    })
}

/// # Safety
/// `d` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bl_decomposition_free(d: *mut BlDecomposition) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    fn last_error() -> String {
        unsafe { CStr::from_ptr(bl_last_error()) }.to_string_lossy().into_owned()
    }

    #[test]
    fn error_mapping() {
        assert_eq!(status_of(&Error::Parse { line: 1, msg: "x".into() }), BlStatus::Parse);
        assert_eq!(status_of(&Error::PerfectSeparation { r: 1.0 }), BlStatus::PerfectSeparation);
        assert_eq!(status_of(&Error::NoConvergence { iterations: 1, gradient: 1.0 }), BlStatus::Numerical);
    }

    #[test]
    fn null_handles_are_rejected() {
        let mut out = ptr::null_mut();
        assert_eq!(unsafe { bl_run(ptr::null(), 5, BlVariant::Plain, f64::NAN, &mut out) }, BlStatus::NullPointer);
        assert!(out.is_null());
        assert!(last_error().contains("matrix"));
        assert_eq!(unsafe { bl_matrix_rows(ptr::null()) }, 0);
        unsafe {
            bl_matrix_free(ptr::null_mut());
            bl_trace_free(ptr::null_mut());
            bl_decomposition_free(ptr::null_mut());
            bl_string_free(ptr::null_mut());
        }
    }

    #[test]
    fn invalid_entries_report_status() {
        let e = [2.0, 0.0];
        let mut m = ptr::null_mut();
        assert_eq!(unsafe { bl_matrix_new(1, 2, e.as_ptr(), &mut m) }, BlStatus::InvalidArgument);
        assert!(m.is_null());
        assert!(!last_error().is_empty());
    }
}
