//! The GAMP outer iteration in scalar-variance form, with per-iteration
//! parameter estimation, an oracle mode with fixed parameters, and the
//! two-phase PE-Lasso pipeline.

mod init;
mod operator;

pub use init::{default_input_params, default_noise_params, PriorFamily};
pub use operator::SensingOperator;

use crate::channels::{AwgnParams, InputChannel, LaplaceParams, MessagePassing};
use crate::error::{Error, Result};
use crate::param_est::{update_all_parameters, ParamEstConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub max_iters: usize,
    pub tol: f64,
    /// `new <- damping * new + (1 - damping) * old` on `x_hat` and `s`
    pub damping: f64,
    /// Skip parameter estimation.
    pub oracle: bool,
    pub tau_min: f64,
    pub tau_max: f64,
    pub param_est: ParamEstConfig,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iters: 200,
            tol: 1e-6,
            damping: 1.0,
            oracle: false,
            tau_min: 1e-12,
            tau_max: 1e12,
            param_est: ParamEstConfig::default(),
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config("tol must be positive".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::Config("damping must lie in (0, 1]".into()));
        }
        if !(self.tau_min > 0.0 && self.tau_min < self.tau_max) {
            return Err(Error::Config("tau clamp range is empty".into()));
        }
        Ok(())
    }
}

/// Per-iteration quantities of the scalar-variance iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct GampState {
    pub x_hat: Vec<f64>,
    pub tau_x: f64,
    pub z_hat: Vec<f64>,
    pub q: Vec<f64>,
    pub tau_q: f64,
    pub s: Vec<f64>,
    pub tau_s: f64,
    pub r: Vec<f64>,
    pub tau_r: f64,
    pub s_prev: Vec<f64>,
    pub iteration: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub x_hat: Vec<f64>,
    pub iterations_used: usize,
    pub converged: bool,
    pub final_params_input: InputChannel,
    pub final_params_output: AwgnParams,
    pub residual_history: Vec<f64>,
    pub tau_x_history: Vec<f64>,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Core loop shared by every mode. `observer` sees the state and the current
/// parameters at the end of each iteration.
pub fn run_gamp_observed<F>(
    a: &SensingOperator,
    y: &[f64],
    input: &InputChannel,
    output: &AwgnParams,
    family: MessagePassing,
    estimate: bool,
    opts: &SolverOptions,
    mut observer: F,
) -> Result<RecoveryResult>
where
    F: FnMut(&GampState, &InputChannel, &AwgnParams),
{
    opts.validate()?;
    input.validate()?;
    output.validate()?;
    let (m, n) = (a.rows(), a.cols());
    if y.len() != m {
        return Err(Error::DimensionMismatch(format!("y has {} entries, A has {m} rows", y.len())));
    }
    if !all_finite(y) {
        return Err(Error::InvalidParams("non-finite measurement".into()));
    }
    if family == MessagePassing::MaxSum && !matches!(input, InputChannel::Laplace(_)) {
        return Err(Error::UnsupportedMaxSum);
    }

    let mut input = input.clone();
    let mut output = *output;
    let clamp = |t: f64| t.clamp(opts.tau_min, opts.tau_max);
    let row_avg = a.frobenius_sq() / m as f64;
    let col_avg = a.frobenius_sq() / n as f64;
    let d = opts.damping;

    let mut st = GampState {
        x_hat: vec![input.prior_mean(); n],
        tau_x: input.prior_variance(),
        z_hat: vec![0.0; m],
        q: vec![0.0; m],
        tau_q: 1.0,
        s: vec![0.0; m],
        tau_s: 0.0,
        r: vec![0.0; n],
        tau_r: 1.0,
        s_prev: vec![0.0; m],
        iteration: 0,
    };
    let mut x_new = vec![0.0; n];
    let mut var = vec![0.0; n];
    let mut back = vec![0.0; n];
    let mut residual_history = Vec::new();
    let mut tau_x_history = Vec::new();
    let mut converged = false;

    for t in 0..opts.max_iters {
        st.iteration = t;
        // output linear step
        st.tau_q = clamp(row_avg * st.tau_x);
        a.forward(&st.x_hat, &mut st.z_hat);
        for ((q, z), sp) in st.q.iter_mut().zip(&st.z_hat).zip(&st.s_prev) {
            *q = z - st.tau_q * sp;
        }
        // output nonlinear step; max-sum and sum-product coincide for AWGN
        let inv = 1.0 / (output.variance + st.tau_q);
        st.tau_s = inv;
        for ((s, (yi, qi)), sp) in st.s.iter_mut().zip(y.iter().zip(&st.q)).zip(&st.s_prev) {
            let fresh = (yi - qi) * inv;
            *s = if t > 0 { d * fresh + (1.0 - d) * sp } else { fresh };
        }
        // input linear step
        st.tau_r = clamp(1.0 / (col_avg * st.tau_s));
        a.adjoint(&st.s, &mut back);
        for ((r, x), b) in st.r.iter_mut().zip(&st.x_hat).zip(&back) {
            *r = x + st.tau_r * b;
        }
        // input nonlinear step
        input.gin_sweep(family, &st.r, st.tau_r, &mut x_new, &mut var)?;
        if d < 1.0 {
            for (xn, xo) in x_new.iter_mut().zip(&st.x_hat) {
                *xn = d * *xn + (1.0 - d) * xo;
            }
        }
        let tau_x = var.iter().sum::<f64>() / n as f64;
        if !(all_finite(&st.q) && all_finite(&st.s) && all_finite(&st.r) && all_finite(&x_new) && tau_x.is_finite())
        {
            return Err(Error::Divergence { iteration: t });
        }
        // parameter step, atomic: a failed update leaves the parameters as they were
        if estimate {
            if let Ok((pi, po)) = update_all_parameters(&st, y, &input, &output, &opts.param_est) {
                input = pi;
                output = po;
            }
        }

        let diff: f64 = x_new.iter().zip(&st.x_hat).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let residual = diff / norm(&st.x_hat).max(1e-12);
        std::mem::swap(&mut st.x_hat, &mut x_new);
        st.tau_x = tau_x.max(0.0);
        st.s_prev.copy_from_slice(&st.s);
        residual_history.push(residual);
        tau_x_history.push(st.tau_x);
        observer(&st, &input, &output);
        if residual < opts.tol {
            converged = true;
            break;
        }
    }

    Ok(RecoveryResult {
        x_hat: st.x_hat,
        iterations_used: residual_history.len(),
        converged,
        final_params_input: input,
        final_params_output: output,
        residual_history,
        tau_x_history,
    })
}

/// Sum-product GAMP with per-iteration MAP parameter estimation. With
/// `opts.oracle` set the parameters stay fixed.
pub fn run_pe_gamp(
    a: &SensingOperator,
    y: &[f64],
    input: &InputChannel,
    output: &AwgnParams,
    opts: &SolverOptions,
) -> Result<RecoveryResult> {
    run_gamp_observed(a, y, input, output, MessagePassing::SumProduct, !opts.oracle, opts, |_, _, _| {})
}

/// Sum-product GAMP at known parameters.
pub fn run_oracle_gamp(
    a: &SensingOperator,
    y: &[f64],
    true_input: &InputChannel,
    true_output: &AwgnParams,
    opts: &SolverOptions,
) -> Result<RecoveryResult> {
    run_gamp_observed(a, y, true_input, true_output, MessagePassing::SumProduct, false, opts, |_, _, _| {})
}

/// Max-sum GAMP with a Laplace prior at fixed `(rate, noise)`: an iterative
/// Lasso solver.
pub fn run_max_sum_lasso(
    a: &SensingOperator,
    y: &[f64],
    prior: &LaplaceParams,
    noise: &AwgnParams,
    opts: &SolverOptions,
) -> Result<RecoveryResult> {
    let input = InputChannel::Laplace(*prior);
    run_gamp_observed(a, y, &input, noise, MessagePassing::MaxSum, false, opts, |_, _, _| {})
}

/// PE-Lasso: sum-product PE-GAMP under a Laplace prior estimates the rate and
/// noise variance, then max-sum GAMP solves the Lasso at those values. The
/// result holds the second phase's estimate and iteration record, with the
/// first phase's parameters.
pub fn run_pe_lasso(a: &SensingOperator, y: &[f64], opts: &SolverOptions) -> Result<RecoveryResult> {
    let init = default_input_params(PriorFamily::Laplace, y, a, 1)?;
    let noise = default_noise_params(y)?;
    let phase1 = run_gamp_observed(a, y, &init, &noise, MessagePassing::SumProduct, true, opts, |_, _, _| {})?;
    let InputChannel::Laplace(prior) = phase1.final_params_input else {
        return Err(Error::InvalidParams("phase one returned a non-Laplace prior".into()));
    };
    run_max_sum_lasso(a, y, &prior, &phase1.final_params_output, opts)
}
