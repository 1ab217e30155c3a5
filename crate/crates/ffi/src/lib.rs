//! C ABI over `junta-core`.
//!
//! Juntas and learning reports are opaque heap handles released with their
//! `*_free` function. Every fallible call returns a [`JuntaStatus`]; on failure
//! the message is kept per thread and read with [`junta_last_error`]. Strings
//! returned by the library are released with [`junta_string_free`]. Signs cross
//! the boundary as `int8_t` values `-1` and `1`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use junta_core::error::Error;
use junta_core::fourier::{biased_coefficient, level_weight};
use junta_core::learner::{learn_junta, LearnReport, LearnStatus, LearnerParams};
use junta_core::measure::BiasVector;
use junta_core::russo::{root_set, russo_residual};
use junta_core::sampling::Oracle;
use junta_core::{Junta, Sign};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JuntaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    SizeLimit = 4,
    ConstantFunction = 5,
    NotFound = 6,
    BufferTooSmall = 7,
    Parse = 8,
    Io = 9,
    Panic = 10,
}

/// Outcome of a learning run.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JuntaLearnStatus {
    ExactSuccess = 0,
    ConstantFunction = 1,
    BudgetExhausted = 2,
    Inconsistent = 3,
    KBoundExceeded = 4,
    NoCoefficientFound = 5,
}

/// Learner settings. A non-positive `threshold` and a zero
/// `samples_per_coeff` or `attempt_budget` select the defaults.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct JuntaLearnOptions {
    pub k: usize,
    pub s: usize,
    pub alpha: f64,
    pub gamma: f64,
    pub delta: f64,
    pub threshold: f64,
    pub samples_per_coeff: u64,
    pub attempt_budget: u64,
    pub unknown_biases: bool,
}

/// Opaque junta handle.
pub struct JuntaHandle(Junta);

/// Opaque learning-report handle.
pub struct JuntaReport(LearnReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> JuntaStatus {
    match e {
        Error::InvalidIndex { .. } | Error::LengthMismatch { .. } | Error::InvalidParams(_) => {
            JuntaStatus::InvalidArgument
        }
        Error::Domain(_) => JuntaStatus::Domain,
        Error::SizeLimit { .. } => JuntaStatus::SizeLimit,
        Error::ConstantFunction => JuntaStatus::ConstantFunction,
        Error::NoWitness | Error::NoCoefficientFound | Error::EmptySample => JuntaStatus::NotFound,
        Error::BudgetExhausted(_) | Error::OracleExhausted(_) => JuntaStatus::NotFound,
        Error::Parse(_) | Error::Json(_) | Error::Csv(_) => JuntaStatus::Parse,
        Error::Io(_) => JuntaStatus::Io,
    }
}

/// Runs `body`, recording any error or panic as the thread's last error.
fn guard(body: impl FnOnce() -> Result<(), (JuntaStatus, String)>) -> JuntaStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => JuntaStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            JuntaStatus::Panic
        }
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, (JuntaStatus, String)>;
}

impl<T> OrStatus<T> for junta_core::Result<T> {
    fn or_status(self) -> Result<T, (JuntaStatus, String)> {
        self.map_err(|e| (status_of(&e), e.to_string()))
    }
}

fn null(what: &str) -> (JuntaStatus, String) {
    (JuntaStatus::NullPointer, format!("{what} is null"))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, (JuntaStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn input<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], (JuntaStatus, String)> {
    if len == 0 {
        Ok(&[])
    } else if p.is_null() {
        Err(null(what))
    } else {
        Ok(slice::from_raw_parts(p, len))
    }
}

fn out_string(s: String, out: *mut *mut c_char) -> Result<(), (JuntaStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    let c = CString::new(s).map_err(|e| (JuntaStatus::Parse, e.to_string()))?;
    unsafe { *out = c.into_raw() };
    Ok(())
}

/// Copies the thread's last error message (nul-terminated, truncated to
/// `cap`) into `buf`; returns the full message length, 0 if none.
///
/// # Safety
/// `buf` must be null or valid for `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn junta_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn junta_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses the JSON form `{"n", "relevant", "core"}`.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn junta_from_json(json: *const c_char, out: *mut *mut JuntaHandle) -> JuntaStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| (JuntaStatus::Parse, e.to_string()))?;
        let f = Junta::from_json(text).or_status()?;
        *out = Box::into_raw(Box::new(JuntaHandle(f)));
        Ok(())
    })
}

/// Random junta on `n` variables with `k` listed relevant coordinates.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn junta_random(
    n: usize,
    k: usize,
    seed: u64,
    nonconstant: bool,
    out: *mut *mut JuntaHandle,
) -> JuntaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let f = Junta::random(n, k, seed, nonconstant).or_status()?;
        *out = Box::into_raw(Box::new(JuntaHandle(f)));
        Ok(())
    })
}

/// # Safety
/// `h` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn junta_free(h: *mut JuntaHandle) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn junta_to_json(h: *const JuntaHandle, out: *mut *mut c_char) -> JuntaStatus {
    guard(|| {
        let f = handle(h, "junta")?;
        out_string(f.0.to_json(), out)
    })
}

/// Number of variables, 0 for a null handle.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn junta_n(h: *const JuntaHandle) -> usize {
    h.as_ref().map_or(0, |f| f.0.n())
}

/// Number of listed relevant coordinates, 0 for a null handle.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn junta_k(h: *const JuntaHandle) -> usize {
    h.as_ref().map_or(0, |f| f.0.k())
}

/// Evaluates at `x` (`len` signs).
///
/// # Safety
/// `x` must be valid for `len` reads; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn junta_eval(h: *const JuntaHandle, x: *const i8, len: usize, out: *mut i8) -> JuntaStatus {
    guard(|| {
        let f = handle(h, "junta")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let x = input(x, len, "x")?
            .iter()
            .map(|&v| Sign::from_i64(v.into()))
            .collect::<junta_core::Result<Vec<_>>>()
            .or_status()?;
        *out = f.0.eval(&x).or_status()?.to_i8();
        Ok(())
    })
}

/// Coefficient of `χ_S` under the uniform bias `r` on every coordinate.
///
/// # Safety
/// `subset` must be valid for `len` reads; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn junta_biased_coefficient(
    h: *const JuntaHandle,
    subset: *const usize,
    len: usize,
    r: f64,
    out: *mut f64,
) -> JuntaStatus {
    guard(|| {
        let f = handle(h, "junta")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let s = input(subset, len, "subset")?;
        let bv = BiasVector::uniform(f.0.n(), r).or_status()?;
        *out = biased_coefficient(&f.0, s, &bv).or_status()?;
        Ok(())
    })
}

/// Sum of squared level-`s` coefficients at bias `r`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn junta_level_weight(h: *const JuntaHandle, s: usize, r: f64, out: *mut f64) -> JuntaStatus {
    guard(|| {
        let f = handle(h, "junta")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = level_weight(&f.0, s, r).or_status()?;
        Ok(())
    })
}

/// Absolute gap between both sides of the `s`-th order Russo identity at `r`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn junta_russo_residual(h: *const JuntaHandle, s: usize, r: f64, out: *mut f64) -> JuntaStatus {
    guard(|| {
        let f = handle(h, "junta")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = russo_residual(&f.0, s, r).or_status()?;
        Ok(())
    })
}

/// Critical biases of level `s`: writes up to `cap` real parts and
/// multiplicities and the full count to `count`. Returns `BufferTooSmall`
/// (with `count` set) when `cap` is short.
///
/// # Safety
/// `re` and `multiplicity` must be valid for `cap` writes (or null when
/// `cap` is 0); `count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn junta_root_set(
    h: *const JuntaHandle,
    s: usize,
    re: *mut f64,
    multiplicity: *mut usize,
    cap: usize,
    count: *mut usize,
) -> JuntaStatus {
    guard(|| {
        let f = handle(h, "junta")?;
        if count.is_null() {
            return Err(null("count"));
        }
        let set = root_set(&f.0, s).or_status()?;
        *count = set.len();
        if set.len() > cap {
            return Err((
                JuntaStatus::BufferTooSmall,
                format!("{} points do not fit in {cap}", set.len()),
            ));
        }
        if !set.is_empty() && (re.is_null() || multiplicity.is_null()) {
            return Err(null("output buffer"));
        }
        for (i, p) in set.points.iter().enumerate() {
            *re.add(i) = p.re + 0.0;
            *multiplicity.add(i) = p.multiplicity;
        }
        Ok(())
    })
}

fn learner_params(o: &JuntaLearnOptions) -> LearnerParams {
    let mut p = LearnerParams::new(o.k, o.s, o.alpha, o.gamma, o.delta);
    p.threshold = (o.threshold > 0.0).then_some(o.threshold);
    p.samples_per_coefficient = (o.samples_per_coeff > 0).then_some(o.samples_per_coeff);
    p.attempt_budget = (o.attempt_budget > 0).then_some(o.attempt_budget);
    p.unknown_biases = o.unknown_biases;
    p
}

/// Learns `h` from simulated oracles at `biases`, oracle `j` seeded from
/// `(seed, j)`.
///
/// # Safety
/// `biases` must be valid for `t` reads; `options` must point to a valid
/// struct; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn junta_learn(
    h: *const JuntaHandle,
    biases: *const f64,
    t: usize,
    options: *const JuntaLearnOptions,
    seed: u64,
    out: *mut *mut JuntaReport,
) -> JuntaStatus {
    guard(|| {
        let f = handle(h, "junta")?;
        let opts = handle(options, "options")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let biases = input(biases, t, "biases")?;
        let mut oracles = biases
            .iter()
            .enumerate()
            .map(|(j, &r)| {
                let o = Oracle::new(f.0.clone(), r, seed, j as u64)?;
                Ok(if opts.unknown_biases { o.hidden() } else { o })
            })
            .collect::<junta_core::Result<Vec<_>>>()
            .or_status()?;
        let report = learn_junta(&mut oracles, &learner_params(opts)).or_status()?;
        *out = Box::into_raw(Box::new(JuntaReport(report)));
        Ok(())
    })
}

/// # Safety
/// `r` must be null or a report from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn junta_report_free(r: *mut JuntaReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// # Safety
/// `r` must be a live report; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn junta_report_status(r: *const JuntaReport, out: *mut JuntaLearnStatus) -> JuntaStatus {
    guard(|| {
        let rep = handle(r, "report")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = match rep.0.status {
            LearnStatus::ExactSuccess => JuntaLearnStatus::ExactSuccess,
            LearnStatus::ConstantFunction => JuntaLearnStatus::ConstantFunction,
            LearnStatus::BudgetExhausted => JuntaLearnStatus::BudgetExhausted,
            LearnStatus::Inconsistent => JuntaLearnStatus::Inconsistent,
            LearnStatus::KBoundExceeded => JuntaLearnStatus::KBoundExceeded,
            LearnStatus::NoCoefficientFound => JuntaLearnStatus::NoCoefficientFound,
        };
        Ok(())
    })
}

/// Writes up to `cap` found variables and the full count to `count`.
///
/// # Safety
/// `buf` must be valid for `cap` writes (or null when `cap` is 0); `count`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn junta_report_relevant(
    r: *const JuntaReport,
    buf: *mut usize,
    cap: usize,
    count: *mut usize,
) -> JuntaStatus {
    guard(|| {
        let rep = handle(r, "report")?;
        if count.is_null() {
            return Err(null("count"));
        }
        let rel = &rep.0.relevant;
        *count = rel.len();
        if rel.len() > cap {
            return Err((
                JuntaStatus::BufferTooSmall,
                format!("{} indices do not fit in {cap}", rel.len()),
            ));
        }
        if !rel.is_empty() {
            if buf.is_null() {
                return Err(null("buf"));
            }
            ptr::copy_nonoverlapping(rel.as_ptr(), buf, rel.len());
        }
        Ok(())
    })
}

/// The report as JSON.
///
/// # Safety
/// `r` must be a live report; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn junta_report_to_json(r: *const JuntaReport, out: *mut *mut c_char) -> JuntaStatus {
    guard(|| {
        let rep = handle(r, "report")?;
        let json = serde_json::to_string(&rep.0).map_err(|e| (JuntaStatus::Parse, e.to_string()))?;
        out_string(json, out)
    })
}
