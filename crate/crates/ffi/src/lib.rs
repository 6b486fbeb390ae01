//! C ABI for the qclt engine.
//!
//! Every function returns a [`QcltStatus`]; results come back through out
//! pointers. Strings handed out by the library must be released with
//! [`qclt_string_free`], handles with their matching `_free` function. After a
//! non-OK status, [`qclt_last_error`] describes the failure on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, c_double, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qclt::clt::{finite_n_moment, limit_moment, q_limit_moment, CltProblem};
use qclt::cli::config::DistributionSpec;
use qclt::fock::qccr::{
    projection_report, qccr_build, qccr_check_relations, qccr_projections, qccr_reconstruct_gamma, QccrModel,
};
use qclt::scalar::parse_rational;
use qclt::{Error, IndependenceKind, Label, SiteDistribution};

/// Status codes returned by every entry point.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QcltStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidArgument = 4,
    MissingMoment = 5,
    NotNormalized = 6,
    DimensionMismatch = 7,
    IllConditioned = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QcltKind {
    Tensor = 0,
    Free = 1,
    Boolean = 2,
    Monotone = 3,
}

impl From<QcltKind> for IndependenceKind {
    fn from(k: QcltKind) -> Self {
        match k {
            QcltKind::Tensor => IndependenceKind::Tensor,
            QcltKind::Free => IndependenceKind::Free,
            QcltKind::Boolean => IndependenceKind::Boolean,
            QcltKind::Monotone => IndependenceKind::Monotone,
        }
    }
}

/// A single-site moment table.
pub struct QcltDistribution(SiteDistribution);

/// A truncated q²-CCR model.
pub struct QcltQccrModel(QccrModel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(QcltStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Parse(_) => QcltStatus::Parse,
            Error::InvalidArgument(_) => QcltStatus::InvalidArgument,
            Error::MissingMoment(_) => QcltStatus::MissingMoment,
            Error::NotNormalized(_) => QcltStatus::NotNormalized,
            Error::DimensionMismatch(_) => QcltStatus::DimensionMismatch,
            Error::IllConditioned(_) => QcltStatus::IllConditioned,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(QcltStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> QcltStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QcltStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            QcltStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(QcltStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).unwrap_or_default().into_raw()
}

unsafe fn write_out<T>(out: *mut T, v: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

/// Copy of the last error message on this thread, or null if none.
/// Release with [`qclt_string_free`].
#[no_mangle]
pub extern "C" fn qclt_last_error() -> *mut c_char {
    LAST_ERROR.with(|e| match &*e.borrow() {
        Some(m) => m.clone().into_raw(),
        None => ptr::null_mut(),
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn qclt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// The symmetric ±1 coin with moments up to `max_degree`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qclt_distribution_bernoulli(max_degree: usize, out: *mut *mut QcltDistribution) -> QcltStatus {
    guard(|| {
        let d = Box::new(QcltDistribution(SiteDistribution::symmetric_bernoulli(max_degree.max(1))));
        write_out(out, Box::into_raw(d), "out")
    })
}

/// Parses a distribution from TOML text (`[adjoints]` and `[moments]` tables).
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qclt_distribution_from_toml(
    toml: *const c_char,
    out: *mut *mut QcltDistribution,
) -> QcltStatus {
    guard(|| {
        let text = read_str(toml, "toml")?;
        let spec: DistributionSpec =
            ::toml::from_str(text).map_err(|e| Failure(QcltStatus::Parse, e.to_string()))?;
        let d = Box::new(QcltDistribution(spec.build()?));
        write_out(out, Box::into_raw(d), "out")
    })
}

/// # Safety
/// `d` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn qclt_distribution_free(d: *mut QcltDistribution) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// `labels` is a comma-separated sequence of label names; when null, the first
/// label is repeated `n` times.
unsafe fn problem(
    kind: QcltKind,
    dist: *const QcltDistribution,
    labels: *const c_char,
    n: usize,
) -> Result<CltProblem, Failure> {
    let dist = dist.as_ref().ok_or_else(|| null("dist"))?;
    let alphabet = dist.0.alphabet();
    let seq: Vec<Label> = if labels.is_null() {
        vec![alphabet.label_at(0); n]
    } else {
        read_str(labels, "labels")?
            .split(',')
            .map(|s| alphabet.label(s.trim()))
            .collect::<Result<_, _>>()?
    };
    Ok(CltProblem::new(kind.into(), dist.0.clone(), seq)?)
}

/// Limit moment as an exact string (`"p/q"`, complex as `"a+bi"`) and its real part.
///
/// # Safety
/// Pointers must be valid; `labels` may be null.
#[no_mangle]
pub unsafe extern "C" fn qclt_limit_moment(
    kind: QcltKind,
    dist: *const QcltDistribution,
    labels: *const c_char,
    n: usize,
    out_exact: *mut *mut c_char,
    out_approx: *mut c_double,
) -> QcltStatus {
    guard(|| {
        let p = problem(kind, dist, labels, n)?;
        let v = limit_moment(&p)?;
        write_out(out_approx, v.approx(), "out_approx")?;
        write_out(out_exact, owned_string(v.to_string()), "out_exact")
    })
}

/// `φ(S_N^{(j_1)} ⋯ S_N^{(j_n)})`; odd degrees may render as `"c/sqrt(N)"`.
///
/// # Safety
/// Pointers must be valid; `labels` may be null.
#[no_mangle]
pub unsafe extern "C" fn qclt_finite_n_moment(
    kind: QcltKind,
    dist: *const QcltDistribution,
    labels: *const c_char,
    n: usize,
    size: u64,
    out_exact: *mut *mut c_char,
    out_approx: *mut c_double,
) -> QcltStatus {
    guard(|| {
        let p = problem(kind, dist, labels, n)?;
        let v = finite_n_moment(&p, size)?;
        write_out(out_approx, v.approx(), "out_approx")?;
        write_out(out_exact, owned_string(v.to_string()), "out_exact")
    })
}

/// `Σ_π q^{cr(π)}` over pair partitions of `[n]`, rendered as a polynomial.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qclt_q_limit_moment(n: usize, out: *mut *mut c_char) -> QcltStatus {
    guard(|| write_out(out, owned_string(q_limit_moment(n).to_string()), "out"))
}

/// # Safety
/// `q` must be a NUL-terminated rational such as `"1/2"`; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qclt_qccr_build(q: *const c_char, depth: usize, out: *mut *mut QcltQccrModel) -> QcltStatus {
    guard(|| {
        let q = parse_rational(read_str(q, "q")?)?;
        let m = Box::new(QcltQccrModel(qccr_build(&q, depth)?));
        write_out(out, Box::into_raw(m), "out")
    })
}

/// # Safety
/// `m` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn qclt_qccr_free(m: *mut QcltQccrModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Interior residual of `αα* − q²α*α − (1 − q²)` in operator norm.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qclt_qccr_residual(m: *const QcltQccrModel, out: *mut c_double) -> QcltStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(|| null("model"))?;
        write_out(out, qccr_check_relations(&m.0).ccr_interior, "out")
    })
}

/// Projection idempotence, `‖Γ − Σ_{k≤K} E_k q^{2k}‖` and the tail bound `q^{2(K+1)}`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qclt_qccr_reconstruct(
    m: *const QcltQccrModel,
    k_max: usize,
    out_idempotence: *mut c_double,
    out_error: *mut c_double,
    out_bound: *mut c_double,
) -> QcltStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(|| null("model"))?;
        let proj = qccr_projections(&m.0, k_max)?;
        let rec = qccr_reconstruct_gamma(&m.0, &proj.e, k_max)?;
        write_out(out_idempotence, projection_report(&proj).idempotence, "out_idempotence")?;
        write_out(out_error, rec.norm_error, "out_error")?;
        write_out(out_bound, rec.tail_bound, "out_bound")
    })
}

/// Runs the command line with `argv` (including the program name) and returns
/// its exit code; standard output is captured into `out_stdout`.
///
/// # Safety
/// `argv` must point to `argc` NUL-terminated strings; `out_stdout` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qclt_cli_run(
    argc: c_int,
    argv: *const *const c_char,
    out_stdout: *mut *mut c_char,
    out_exit_code: *mut c_int,
) -> QcltStatus {
    guard(|| {
        if argv.is_null() && argc > 0 {
            return Err(null("argv"));
        }
        let args = (0..argc.max(0) as usize)
            .map(|i| read_str(*argv.add(i), "argv").map(str::to_owned))
            .collect::<Result<Vec<_>, _>>()?;
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = qclt::cli::run(args, &mut out, &mut err);
        let mut text = String::from_utf8_lossy(&out).into_owned();
        if code != 0 && text.is_empty() {
            text = String::from_utf8_lossy(&err).into_owned();
        }
        write_out(out_exit_code, code, "out_exit_code")?;
        write_out(out_stdout, owned_string(text), "out_stdout")
    })
}
