//! C interface. Every function returns an [`SltStatus`]; on failure the
//! message is kept per thread and read with [`slt_last_error`].
//!
//! Problems are described with the same strings the command line accepts
//! (builtin name, potential expression, interval, boundary conditions) and
//! live behind an opaque [`SltProblem`] handle.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use sltransmute::cli::builtins::Kind;
use sltransmute::cli::{Common, Setup};
use sltransmute::spectral::{quantum_well, Mode, SpectralProblem};
use sltransmute::{Error, ErrorCategory, C64};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SltStatus {
    Ok = 0,
    /// A required pointer was null or a string was not UTF-8.
    InvalidArgument = 1,
    Config = 2,
    Construction = 3,
    /// Root finding failed or fewer eigenvalues than requested were found.
    Convergence = 4,
    /// Internal panic; the handle involved should be freed.
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SltMode {
    Auto = 0,
    Real = 1,
    Complex = 2,
}

/// Problem description. Null strings mean "not given"; zero sizes mean
/// "default".
#[repr(C)]
pub struct SltProblemSpec {
    /// e.g. `"paine1"`, `"coffey_evans(50)"`.
    pub builtin: *const c_char,
    /// Expression in `x`.
    pub potential: *const c_char,
    /// `"a,b"`.
    pub interval: *const c_char,
    /// `"dirichlet"`, `"neumann"` or `"alpha=..,beta=..[,kappa=..]"` in `omega`.
    pub bc_left: *const c_char,
    pub bc_right: *const c_char,
    pub m: usize,
    pub n: usize,
    pub segments: usize,
}

/// Opaque problem handle.
pub struct SltProblem {
    problem: SpectralProblem,
    kind: Kind,
    offset: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn fail(e: Error) -> SltStatus {
    set_error(e.to_string());
    match e.category() {
        ErrorCategory::Config => SltStatus::Config,
        ErrorCategory::Construction => SltStatus::Construction,
        ErrorCategory::Convergence => SltStatus::Convergence,
    }
}

fn invalid(msg: &str) -> SltStatus {
    set_error(msg.to_string());
    SltStatus::InvalidArgument
}

fn guard(f: impl FnOnce() -> SltStatus) -> SltStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal error: {msg}"));
            SltStatus::Panic
        }
    }
}

/// # Safety
/// `p` is null or a valid NUL-terminated string.
unsafe fn opt_str(p: *const c_char) -> Result<Option<String>, SltStatus> {
    if p.is_null() {
        return Ok(None);
    }
    CStr::from_ptr(p)
        .to_str()
        .map(|s| Some(s.to_string()))
        .map_err(|_| invalid("string argument is not valid UTF-8"))
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `len`). Returns the full message length.
///
/// # Safety
/// `buf` is null or points to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn slt_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Builds a problem; `*out` receives the handle on success.
///
/// # Safety
/// `spec` and `out` are valid pointers; the strings in `spec` are null or
/// NUL terminated.
#[no_mangle]
pub unsafe extern "C" fn slt_problem_new(spec: *const SltProblemSpec, out: *mut *mut SltProblem) -> SltStatus {
    guard(|| {
        if spec.is_null() || out.is_null() {
            return invalid("null pointer");
        }
        *out = ptr::null_mut();
        let s = &*spec;
        let common = (|| -> Result<Common, SltStatus> {
            Ok(Common {
                builtin: opt_str(s.builtin)?,
                potential: opt_str(s.potential)?,
                interval: opt_str(s.interval)?,
                bc_left: opt_str(s.bc_left)?,
                bc_right: opt_str(s.bc_right)?,
                m: (s.m > 0).then_some(s.m),
                n: (s.n > 0).then_some(s.n),
                segments: (s.segments > 0).then_some(s.segments),
                ..Common::default()
            })
        })();
        let common = match common {
            Ok(c) => c,
            Err(st) => return st,
        };
        let built = Setup::resolve(&common).and_then(|setup| {
            let p = setup.build(setup.disc)?;
            Ok(SltProblem {
                problem: p,
                kind: setup.def.kind,
                offset: setup.def.a,
            })
        });
        match built {
            Ok(h) => {
                *out = Box::into_raw(Box::new(h));
                SltStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `p` is null or a handle from [`slt_problem_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn slt_problem_free(p: *mut SltProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Achieved kernel fit errors.
///
/// # Safety
/// All pointers valid.
#[no_mangle]
pub unsafe extern "C" fn slt_problem_eps(p: *const SltProblem, eps1: *mut f64, eps2: *mut f64) -> SltStatus {
    guard(|| {
        if p.is_null() || eps1.is_null() || eps2.is_null() {
            return invalid("null pointer");
        }
        let (a, b) = (*p).problem.eps();
        *eps1 = a;
        *eps2 = b;
        SltStatus::Ok
    })
}

/// `Φ_N(ω)`.
///
/// # Safety
/// All pointers valid.
#[no_mangle]
pub unsafe extern "C" fn slt_char_function(
    p: *const SltProblem,
    omega_re: f64,
    omega_im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> SltStatus {
    guard(|| {
        if p.is_null() || out_re.is_null() || out_im.is_null() {
            return invalid("null pointer");
        }
        match (*p).problem.char_function(C64::new(omega_re, omega_im)) {
            Ok(v) => {
                *out_re = v.re;
                *out_im = v.im;
                SltStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Up to `count` eigenvalues into `lambda_re[..]`, `lambda_im[..]`;
/// `*found` is the number written. Well-type builtins return bound states
/// (deepest first). Fewer than `count` gives [`SltStatus::Convergence`] with
/// the found values still written.
///
/// # Safety
/// `lambda_re` and `lambda_im` hold `count` doubles; other pointers valid.
#[no_mangle]
pub unsafe extern "C" fn slt_find_eigenvalues(
    p: *const SltProblem,
    count: usize,
    mode: SltMode,
    lambda_re: *mut f64,
    lambda_im: *mut f64,
    found: *mut usize,
) -> SltStatus {
    guard(|| {
        if p.is_null() || lambda_re.is_null() || lambda_im.is_null() || found.is_null() {
            return invalid("null pointer");
        }
        *found = 0;
        if count == 0 {
            return invalid("count must be positive");
        }
        let h = &*p;
        let r = if h.kind == Kind::Well {
            quantum_well(&h.problem, None)
        } else {
            let mode = match mode {
                SltMode::Auto => Mode::Auto,
                SltMode::Real => Mode::RealScan,
                SltMode::Complex => Mode::Complex,
            };
            h.problem.find_eigenvalues(count, mode)
        };
        let r = match r {
            Ok(r) => r,
            Err(e) => return fail(e),
        };
        let n = r.len().min(count);
        for (i, l) in r.eigenvalues.iter().take(n).enumerate() {
            *lambda_re.add(i) = l.re;
            *lambda_im.add(i) = l.im;
        }
        *found = n;
        if n < count {
            set_error(format!("found {n} of {count} requested eigenvalues"));
            return SltStatus::Convergence;
        }
        SltStatus::Ok
    })
}

/// Solution of `y(a) = y0`, `y'(a) = y1` at `n` points `xs` given in the
/// problem's own coordinates; values go to `y_re`, `y_im`.
///
/// # Safety
/// `xs`, `y_re` and `y_im` hold `n` doubles; `p` is valid.
#[no_mangle]
pub unsafe extern "C" fn slt_solve_ivp(
    p: *const SltProblem,
    lambda_re: f64,
    lambda_im: f64,
    y0_re: f64,
    y0_im: f64,
    y1_re: f64,
    y1_im: f64,
    xs: *const f64,
    n: usize,
    y_re: *mut f64,
    y_im: *mut f64,
) -> SltStatus {
    guard(|| {
        if p.is_null() || (n > 0 && (xs.is_null() || y_re.is_null() || y_im.is_null())) {
            return invalid("null pointer");
        }
        if n == 0 {
            return SltStatus::Ok;
        }
        let h = &*p;
        let local: Vec<f64> = std::slice::from_raw_parts(xs, n).iter().map(|x| x - h.offset).collect();
        match h.problem.solve_ivp(
            C64::new(lambda_re, lambda_im),
            C64::new(y0_re, y0_im),
            C64::new(y1_re, y1_im),
            &local,
        ) {
            Ok(v) => {
                for (i, (y, _)) in v.into_iter().enumerate() {
                    *y_re.add(i) = y.re;
                    *y_im.add(i) = y.im;
                }
                SltStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}
