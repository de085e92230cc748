//! C interface to pegamp.
//!
//! Objects cross the boundary as opaque handles created by `*_new` or a solve
//! call and released with the matching `*_free`. Every fallible call returns a
//! [`PegampStatus`]; on failure [`pegamp_last_error`] holds a message for the
//! calling thread. Panics are caught and reported as `PEGAMP_STATUS_PANIC`.

#![allow(clippy::missing_safety_doc)]

use pegamp::channels::{AwgnParams, BgmParams, InputChannel};
use pegamp::gamp::{
    default_input_params, default_noise_params, run_oracle_gamp, run_pe_gamp, run_pe_lasso, PriorFamily,
    RecoveryResult, SensingOperator, SolverOptions,
};
use pegamp::state_evolution::{se_run, SeConfig};
use pegamp::Error;
use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PegampStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    Divergence = 4,
    Numerical = 5,
    Config = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PegampVariant {
    PeBgm = 0,
    PeBem = 1,
    PeLasso = 2,
}

/// Solver controls. Obtain defaults from [`pegamp_options_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PegampOptions {
    pub max_iters: usize,
    pub tol: f64,
    pub damping: f64,
    /// mixture components of the BGm/BEm priors
    pub components: usize,
}

/// Dense row-major sensing matrix.
pub struct PegampOperator(SensingOperator);

/// Outcome of one solve.
pub struct PegampResult(RecoveryResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> PegampStatus {
    match e {
        Error::DimensionMismatch(_) => PegampStatus::DimensionMismatch,
        Error::Divergence { .. } => PegampStatus::Divergence,
        Error::Config(_) => PegampStatus::Config,
        Error::EmptyReduction
        | Error::DegenerateEvidence
        | Error::InvalidCovariance
        | Error::UndefinedRelativeError
        | Error::DegenerateRow => PegampStatus::Numerical,
        _ => PegampStatus::InvalidArgument,
    }
}

/// Run `f`, turning errors and panics into a status and a stored message.
fn guard<F: FnOnce() -> Result<(), (PegampStatus, String)>>(f: F) -> PegampStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PegampStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            PegampStatus::Panic
        }
    }
}

fn lib<T>(r: pegamp::Result<T>) -> Result<T, (PegampStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (PegampStatus, String) {
    (PegampStatus::NullPointer, format!("{what} is null"))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], (PegampStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn solver_options(o: &PegampOptions) -> SolverOptions {
    SolverOptions { max_iters: o.max_iters, tol: o.tol, damping: o.damping, ..SolverOptions::default() }
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pegamp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn pegamp_status_str(status: PegampStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        PegampStatus::Ok => b"ok\0",
        PegampStatus::NullPointer => b"null pointer\0",
        PegampStatus::InvalidArgument => b"invalid argument\0",
        PegampStatus::DimensionMismatch => b"dimension mismatch\0",
        PegampStatus::Divergence => b"divergence\0",
        PegampStatus::Numerical => b"numerical failure\0",
        PegampStatus::Config => b"invalid configuration\0",
        PegampStatus::Panic => b"internal panic\0",
    };
    s.as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn pegamp_options_default() -> PegampOptions {
    let d = SolverOptions::default();
    PegampOptions { max_iters: d.max_iters, tol: d.tol, damping: d.damping, components: 3 }
}

/// Copy a `rows x cols` row-major matrix into a new operator.
#[no_mangle]
pub unsafe extern "C" fn pegamp_operator_new(
    rows: usize,
    cols: usize,
    data: *const f64,
    out: *mut *mut PegampOperator,
) -> PegampStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let len = rows.checked_mul(cols).ok_or((PegampStatus::InvalidArgument, "size overflow".to_string()))?;
        let d = slice(data, len, "data")?;
        let op = lib(SensingOperator::new(rows, cols, d.to_vec()))?;
        *out = Box::into_raw(Box::new(PegampOperator(op)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn pegamp_operator_free(op: *mut PegampOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

#[no_mangle]
pub unsafe extern "C" fn pegamp_operator_rows(op: *const PegampOperator) -> usize {
    op.as_ref().map_or(0, |o| o.0.rows())
}

#[no_mangle]
pub unsafe extern "C" fn pegamp_operator_cols(op: *const PegampOperator) -> usize {
    op.as_ref().map_or(0, |o| o.0.cols())
}

/// Recover `x` from `y` (length `rows`) with a parameter-estimating variant.
#[no_mangle]
pub unsafe extern "C" fn pegamp_recover(
    op: *const PegampOperator,
    y: *const f64,
    y_len: usize,
    variant: PegampVariant,
    options: *const PegampOptions,
    out: *mut *mut PegampResult,
) -> PegampStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let a = &op.as_ref().ok_or_else(|| null("operator"))?.0;
        let opts = options.as_ref().copied().unwrap_or_else(|| pegamp_options_default());
        let y = slice(y, y_len, "y")?;
        let so = solver_options(&opts);
        let res = match variant {
            PegampVariant::PeBgm | PegampVariant::PeBem => {
                let fam = if variant == PegampVariant::PeBgm { PriorFamily::Bgm } else { PriorFamily::Bem };
                let input = lib(default_input_params(fam, y, a, opts.components))?;
                let noise = lib(default_noise_params(y))?;
                lib(run_pe_gamp(a, y, &input, &noise, &so))?
            }
            PegampVariant::PeLasso => lib(run_pe_lasso(a, y, &so))?,
        };
        *out = Box::into_raw(Box::new(PegampResult(res)));
        Ok(())
    })
}

/// Sum-product GAMP at a known Bernoulli-Gaussian prior `(sparsity, 0, 1)`
/// and noise variance.
#[no_mangle]
pub unsafe extern "C" fn pegamp_recover_oracle_bg(
    op: *const PegampOperator,
    y: *const f64,
    y_len: usize,
    sparsity: f64,
    noise_variance: f64,
    options: *const PegampOptions,
    out: *mut *mut PegampResult,
) -> PegampStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let a = &op.as_ref().ok_or_else(|| null("operator"))?.0;
        let opts = options.as_ref().copied().unwrap_or_else(|| pegamp_options_default());
        let y = slice(y, y_len, "y")?;
        let prior =
            InputChannel::Bgm(BgmParams { sparsity, weights: vec![1.0], means: vec![0.0], variances: vec![1.0] });
        let noise = AwgnParams { variance: noise_variance };
        let res = lib(run_oracle_gamp(a, y, &prior, &noise, &solver_options(&opts)))?;
        *out = Box::into_raw(Box::new(PegampResult(res)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn pegamp_result_free(res: *mut PegampResult) {
    if !res.is_null() {
        drop(Box::from_raw(res));
    }
}

/// Length of the estimate, 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn pegamp_result_len(res: *const PegampResult) -> usize {
    res.as_ref().map_or(0, |r| r.0.x_hat.len())
}

#[no_mangle]
pub unsafe extern "C" fn pegamp_result_iterations(res: *const PegampResult) -> usize {
    res.as_ref().map_or(0, |r| r.0.iterations_used)
}

#[no_mangle]
pub unsafe extern "C" fn pegamp_result_converged(res: *const PegampResult) -> bool {
    res.as_ref().is_some_and(|r| r.0.converged)
}

/// Estimated noise variance.
#[no_mangle]
pub unsafe extern "C" fn pegamp_result_noise_variance(res: *const PegampResult) -> f64 {
    res.as_ref().map_or(f64::NAN, |r| r.0.final_params_output.variance)
}

/// Copy the estimate into `dst`, which must hold `len` values with `len`
/// equal to [`pegamp_result_len`].
#[no_mangle]
pub unsafe extern "C" fn pegamp_result_x_hat(res: *const PegampResult, dst: *mut f64, len: usize) -> PegampStatus {
    guard(|| {
        let r = &res.as_ref().ok_or_else(|| null("result"))?.0;
        if len != r.x_hat.len() {
            return Err((PegampStatus::DimensionMismatch, format!("buffer holds {len}, estimate has {}", r.x_hat.len())));
        }
        if dst.is_null() {
            return Err(null("dst"));
        }
        std::slice::from_raw_parts_mut(dst, len).copy_from_slice(&r.x_hat);
        Ok(())
    })
}

/// Oracle state-evolution MSE for a Bernoulli-Gaussian signal. Writes the
/// predictions for `t = 0..len` into `mse`.
#[no_mangle]
pub unsafe extern "C" fn pegamp_se_mse(
    beta: f64,
    sparsity: f64,
    noise_variance: f64,
    mc_samples: usize,
    seed: u64,
    mse: *mut f64,
    len: usize,
) -> PegampStatus {
    guard(|| {
        if len == 0 {
            return Err((PegampStatus::InvalidArgument, "need at least one output slot".into()));
        }
        if mse.is_null() {
            return Err(null("mse"));
        }
        let prior =
            InputChannel::Bgm(BgmParams { sparsity, weights: vec![1.0], means: vec![0.0], variances: vec![1.0] });
        let mut cfg = SeConfig::oracle(prior, noise_variance, beta, mc_samples, seed);
        cfg.max_iters = len - 1;
        cfg.tol = 0.0;
        let traj = lib(se_run(&cfg))?;
        let out = std::slice::from_raw_parts_mut(mse, len);
        out.fill(f64::NAN);
        for (o, s) in out.iter_mut().zip(&traj) {
            *o = s.mse;
        }
        Ok(())
    })
}
