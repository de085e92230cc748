//! Monte-Carlo state evolution for sum-product GAMP with a BGm prior and AWGN
//! output, optionally with the per-iteration parameter updates.
//!
//! All expectations are sample means over one pool of random numbers drawn at
//! construction and reused at every iteration, so successive iterates share
//! their Monte-Carlo error instead of jittering.

use crate::channels::{gout_awgn_sum_product, AwgnParams, InputChannel};
use crate::error::{Error, Result};
use crate::param_est::{update_input_params, update_output_params, ParamEstConfig};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use gauss_quad::GaussHermite;
use statrs::distribution::{ContinuousCDF, Normal};
use std::num::NonZeroUsize;
use std::io::Write;

/// Smallest sample pool accepted.
pub const MIN_MC_SAMPLES: usize = 10_000;
const PSD_TOL: f64 = 1e-9;
const TAU_MIN: f64 = 1e-12;
const CHUNK: usize = 4096;
const HERMITE_NODES: usize = 40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeConfig {
    /// prior the signal is drawn from
    pub true_input: InputChannel,
    /// noise variance of the measurements
    pub true_noise: f64,
    /// parameters the recursion starts from (equal to the truth for oracle runs)
    pub init_input: InputChannel,
    pub init_noise: AwgnParams,
    /// `N / M`
    pub beta: f64,
    pub mc_samples: usize,
    pub seed: u64,
    pub max_iters: usize,
    /// stop once the predicted MSE moves less than this
    pub tol: f64,
    /// run the parameter updates on the sample pool
    pub estimate: bool,
    /// `xi_r = tau_r^2 E[g_out^2]`; `false` gives the unsquared form
    pub square_xi: bool,
    pub param_est: ParamEstConfig,
}

impl SeConfig {
    /// Oracle recursion: parameters fixed at the generating values.
    pub fn oracle(input: InputChannel, noise: f64, beta: f64, mc_samples: usize, seed: u64) -> Self {
        SeConfig {
            init_input: input.clone(),
            true_input: input,
            true_noise: noise,
            init_noise: AwgnParams { variance: noise },
            beta,
            mc_samples,
            seed,
            max_iters: 100,
            tol: 1e-6,
            estimate: false,
            square_xi: true,
            param_est: ParamEstConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !matches!(self.true_input, InputChannel::Bgm(_)) || !matches!(self.init_input, InputChannel::Bgm(_)) {
            return Err(Error::InvalidParams("state evolution supports the BGm prior only".into()));
        }
        self.true_input.validate()?;
        self.init_input.validate()?;
        self.init_noise.validate()?;
        if !(self.true_noise >= 0.0 && self.true_noise.is_finite()) {
            return Err(Error::NonpositiveVariance);
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::Config("beta must be positive".into()));
        }
        if self.mc_samples < MIN_MC_SAMPLES {
            return Err(Error::Config(format!("mc_samples must be at least {MIN_MC_SAMPLES}")));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be positive".into()));
        }
        Ok(())
    }
}

/// Scalars of the recursion at one iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeState {
    pub t: usize,
    pub tau_x_bar: f64,
    pub tau_q_bar: f64,
    pub tau_r_bar: f64,
    pub xi_r: f64,
    pub alpha_r: f64,
    /// second moments of `(X, X_hat)`
    pub kx: [[f64; 2]; 2],
    /// `beta * kx`
    pub kq: [[f64; 2]; 2],
    pub beta: f64,
    pub mc_samples: usize,
    /// predicted `E[(X - X_hat)^2]`
    pub mse: f64,
    pub input: InputChannel,
    pub output: AwgnParams,
}

impl SeState {
    /// The Bernoulli weight of the current prior estimate.
    pub fn sparsity(&self) -> f64 {
        match &self.input {
            InputChannel::Bgm(p) => p.sparsity,
            InputChannel::Bem(p) => p.sparsity,
            InputChannel::Laplace(_) => f64::NAN,
        }
    }
}

/// Common random numbers shared by every iteration.
struct Pool {
    x: Vec<f64>,
    v: Vec<f64>,
    gz: Vec<f64>,
    gq: Vec<f64>,
    w: Vec<f64>,
}

impl Pool {
    /// Stratified draws: the pool holds exactly the expected number of
    /// entries of each mixture component and its normals come one per
    /// equal-probability stratum, shuffled. This removes the leading
    /// Monte-Carlo error in the low-order moments.
    fn draw(input: &InputChannel, n: usize, seed: u64) -> Result<Self> {
        let InputChannel::Bgm(p) = input else {
            return Err(Error::InvalidParams("state evolution supports the BGm prior only".into()));
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = vec![0.0; n];
        let mut filled = 0;
        let mut acc = 0.0;
        for c in 0..p.components() {
            acc += p.sparsity * p.weights[c];
            let end = ((acc * n as f64).round() as usize).min(n);
            if end > filled {
                let g = stratified_normals(end - filled, &mut rng);
                let sd = p.variances[c].sqrt();
                for (xi, gi) in x[filled..end].iter_mut().zip(g) {
                    *xi = p.means[c] + sd * gi;
                }
                filled = end;
            }
        }
        x.shuffle(&mut rng);
        let mut v = stratified_normals(n, &mut rng);
        let mut gz = stratified_normals(n, &mut rng);
        let mut gq = stratified_normals(n, &mut rng);
        let mut w = stratified_normals(n, &mut rng);
        // moment matching: the Gaussian columns become exactly orthonormal in
        // the pool's empirical inner product, and V uncorrelated with X
        let mut x_c = x.clone();
        let mx = x_c.iter().sum::<f64>() / n as f64;
        x_c.iter_mut().for_each(|e| *e -= mx);
        orthonormalize(&mut v, &[&x_c]);
        orthonormalize(&mut gz, &[]);
        orthonormalize(&mut gq, &[&gz]);
        orthonormalize(&mut w, &[&gz, &gq]);
        Ok(Pool { x, v, gz, gq, w })
    }
}

/// `count` standard normals, one from each of `count` equal-probability
/// strata, in random order.
fn stratified_normals<R: Rng>(count: usize, rng: &mut R) -> Vec<f64> {
    let std = Normal::standard();
    let mut out: Vec<f64> = (0..count)
        .map(|k| {
            let u: f64 = rng.random();
            let p = ((k as f64 + u) / count as f64).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON);
            std.inverse_cdf(p)
        })
        .collect();
    out.shuffle(rng);
    out
}

/// Center `col`, remove its projection on each of the centered `basis`
/// columns and scale it to unit mean square.
fn orthonormalize(col: &mut [f64], basis: &[&[f64]]) {
    let n = col.len() as f64;
    let m = col.iter().sum::<f64>() / n;
    col.iter_mut().for_each(|e| *e -= m);
    for b in basis {
        let bb: f64 = b.iter().map(|e| e * e).sum();
        if bb > 0.0 {
            let c = col.iter().zip(b.iter()).map(|(u, v)| u * v).sum::<f64>() / bb;
            col.iter_mut().zip(b.iter()).for_each(|(u, v)| *u -= c * v);
        }
    }
    let ms = col.iter().map(|e| e * e).sum::<f64>() / n;
    col.iter_mut().for_each(|e| *e /= ms.sqrt());
}

/// Driver owning the sample pool.
pub struct StateEvolution {
    cfg: SeConfig,
    pool: Pool,
    /// probabilists' Gauss-Hermite rule for expectations over `V`
    nodes: Vec<(f64, f64)>,
    r: Vec<f64>,
    q: Vec<f64>,
    y: Vec<f64>,
}

impl StateEvolution {
    pub fn new(cfg: SeConfig) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.mc_samples;
        let pool = Pool::draw(&cfg.true_input, n, cfg.seed)?;
        Ok(StateEvolution {
            cfg,
            pool,
            nodes: hermite_rule(HERMITE_NODES),
            r: vec![0.0; n],
            q: vec![0.0; n],
            y: vec![0.0; n],
        })
    }

    pub fn config(&self) -> &SeConfig {
        &self.cfg
    }

    /// State before the first iteration: `X_hat` at the prior mean.
    pub fn initial_state(&mut self) -> SeState {
        let mean = self.cfg.init_input.prior_mean();
        let tau_x = self.cfg.init_input.prior_variance();
        let x_hat = vec![mean; self.pool.x.len()];
        let kx = second_moments(&self.pool.x, &x_hat);
        SeState {
            t: 0,
            tau_x_bar: tau_x,
            tau_q_bar: self.cfg.beta * tau_x,
            tau_r_bar: f64::NAN,
            xi_r: f64::NAN,
            alpha_r: f64::NAN,
            kq: scale(kx, self.cfg.beta),
            kx,
            beta: self.cfg.beta,
            mc_samples: self.cfg.mc_samples,
            mse: mse(&self.pool.x, &x_hat),
            input: self.cfg.init_input.clone(),
            output: self.cfg.init_noise,
        }
    }

    /// One output update followed by one input update and, when enabled,
    /// the parameter updates.
    pub fn step(&mut self, state: &SeState) -> Result<SeState> {
        let beta = self.cfg.beta;
        let tau_q = (beta * state.tau_x_bar).max(TAU_MIN);
        let kq = scale(state.kx, beta);
        let (l11, l21, l22) = cholesky_psd(kq)?;
        let sqrt_noise = self.cfg.true_noise.sqrt();
        let theta = state.output;
        theta.validate()?;

        let pool = &self.pool;
        let (q, y) = (&mut self.q, &mut self.y);
        q.par_chunks_mut(CHUNK)
            .zip(y.par_chunks_mut(CHUNK))
            .enumerate()
            .for_each(|(k, (qc, yc))| {
                let o = k * CHUNK;
                for i in 0..qc.len() {
                    let z = l11 * pool.gz[o + i];
                    qc[i] = l21 * pool.gz[o + i] + l22 * pool.gq[o + i];
                    yc[i] = z + sqrt_noise * pool.w[o + i];
                }
            });

        // E[g_out], E[g_out^2] and E[-d g_out / dq]; for AWGN d g_out / dz = -d g_out / dq.
        let (sum_s, sum_s2, sum_ts) = self
            .q
            .par_iter()
            .zip(self.y.par_iter())
            .map(|(qi, yi)| -> Result<(f64, f64, f64)> {
                let g = gout_awgn_sum_product(&theta, *qi, tau_q, *yi)?;
                Ok((g.mean, g.mean * g.mean, g.variance))
            })
            .try_reduce(|| (0.0, 0.0, 0.0), |a, b| Ok((a.0 + b.0, a.1 + b.1, a.2 + b.2)))?;
        let n = self.cfg.mc_samples as f64;
        let e_ts = sum_ts / n;
        let tau_r = 1.0 / e_ts;
        let xi_r = if self.cfg.square_xi { tau_r * tau_r * sum_s2 / n } else { tau_r * tau_r * sum_s / n };
        let alpha_r = tau_r * e_ts;
        if !(xi_r >= 0.0) || !tau_r.is_finite() {
            return Err(Error::InvalidCovariance);
        }

        let input = &state.input;
        input.validate()?;
        let m = input_moments(input, &pool.x, alpha_r, xi_r.sqrt(), tau_r, &self.nodes);
        let tau_x = m.var;
        let kx = [[m.xx, m.x_xhat], [m.x_xhat, m.xhat2]];
        let mse = m.err2;

        let (new_input, new_output) = if self.cfg.estimate {
            let sd = xi_r.sqrt();
            self.r.par_iter_mut().enumerate().for_each(|(i, ri)| *ri = alpha_r * pool.x[i] + sd * pool.v[i]);
            let pe = &self.cfg.param_est;
            let inp = update_input_params(input, &self.r, tau_r, pe)?;
            let out = if pe.estimate_noise { update_output_params(&theta, &self.q, tau_q, &self.y, pe)? } else { theta };
            (inp, out)
        } else {
            (input.clone(), theta)
        };

        Ok(SeState {
            t: state.t + 1,
            tau_x_bar: tau_x,
            tau_q_bar: tau_q,
            tau_r_bar: tau_r,
            xi_r,
            alpha_r,
            kx,
            kq,
            beta,
            mc_samples: self.cfg.mc_samples,
            mse,
            input: new_input,
            output: new_output,
        })
    }

    /// Iterate until the MSE settles or `max_iters` steps; the trajectory
    /// starts with the initial state.
    pub fn run(&mut self) -> Result<Vec<SeState>> {
        let mut traj = vec![self.initial_state()];
        for _ in 0..self.cfg.max_iters {
            let prev = traj.last().expect("non-empty");
            let next = self.step(prev)?;
            let done = (next.mse - prev.mse).abs() < self.cfg.tol;
            traj.push(next);
            if done {
                break;
            }
        }
        Ok(traj)
    }
}

/// One step from `state` with a fresh pool.
pub fn se_step(state: &SeState, cfg: &SeConfig) -> Result<SeState> {
    StateEvolution::new(cfg.clone())?.step(state)
}

pub fn se_run(cfg: &SeConfig) -> Result<Vec<SeState>> {
    StateEvolution::new(cfg.clone())?.run()
}

/// Trajectory CSV: `t,tau_x_bar,tau_r_bar,mse_pred,lambda1_bar,theta1_bar`.
pub fn write_trajectory_csv<W: Write>(traj: &[SeState], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "tau_x_bar", "tau_r_bar", "mse_pred", "lambda1_bar", "theta1_bar"])
        .map_err(csv_err)?;
    for s in traj {
        w.write_record(&[
            s.t.to_string(),
            s.tau_x_bar.to_string(),
            s.tau_r_bar.to_string(),
            s.mse.to_string(),
            s.sparsity().to_string(),
            s.output.variance.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Nodes and weights with `sum w f(v) ~ E[f(V)]`, `V ~ N(0, 1)`.
fn hermite_rule(n: usize) -> Vec<(f64, f64)> {
    let rule = GaussHermite::new(NonZeroUsize::new(n).expect("positive degree"));
    let norm = std::f64::consts::PI.sqrt();
    rule.as_node_weight_pairs().iter().map(|(x, w)| (std::f64::consts::SQRT_2 * x, w / norm)).collect()
}

/// Pool averages of the input step's moments, each integrated exactly over
/// `V` for the pooled `X`.
#[derive(Default, Clone, Copy)]
struct InputMoments {
    var: f64,
    xx: f64,
    x_xhat: f64,
    xhat2: f64,
    err2: f64,
}

impl InputMoments {
    fn add(self, o: Self) -> Self {
        InputMoments {
            var: self.var + o.var,
            xx: self.xx + o.xx,
            x_xhat: self.x_xhat + o.x_xhat,
            xhat2: self.xhat2 + o.xhat2,
            err2: self.err2 + o.err2,
        }
    }

    fn scaled(self, s: f64) -> Self {
        InputMoments {
            var: s * self.var,
            xx: s * self.xx,
            x_xhat: s * self.x_xhat,
            xhat2: s * self.xhat2,
            err2: s * self.err2,
        }
    }
}

fn input_moments(
    input: &InputChannel,
    x: &[f64],
    alpha: f64,
    sd: f64,
    tau_r: f64,
    nodes: &[(f64, f64)],
) -> InputMoments {
    let at = |xi: f64| {
        let mut m = InputMoments::default();
        for &(v, w) in nodes {
            let pm = input.gin_unchecked(alpha * xi + sd * v, tau_r);
            let e = xi - pm.mean;
            m.var += w * pm.variance;
            m.x_xhat += w * xi * pm.mean;
            m.xhat2 += w * pm.mean * pm.mean;
            m.err2 += w * e * e;
        }
        m.xx = xi * xi;
        m
    };
    // the spike entries all share one integral
    let zeros = x.iter().filter(|v| **v == 0.0).count();
    let base = if zeros > 0 { at(0.0).scaled(zeros as f64) } else { InputMoments::default() };
    let total = x
        .par_iter()
        .filter(|v| **v != 0.0)
        .map(|v| at(*v))
        .reduce(InputMoments::default, InputMoments::add)
        .add(base);
    total.scaled(1.0 / x.len() as f64)
}

fn mse(x: &[f64], x_hat: &[f64]) -> f64 {
    x.par_iter().zip(x_hat.par_iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / x.len() as f64
}

fn second_moments(x: &[f64], x_hat: &[f64]) -> [[f64; 2]; 2] {
    let (a, b, c) = x
        .par_iter()
        .zip(x_hat.par_iter())
        .map(|(u, v)| (u * u, u * v, v * v))
        .reduce(|| (0.0, 0.0, 0.0), |p, q| (p.0 + q.0, p.1 + q.1, p.2 + q.2));
    let n = x.len() as f64;
    [[a / n, b / n], [b / n, c / n]]
}

fn scale(k: [[f64; 2]; 2], s: f64) -> [[f64; 2]; 2] {
    [[s * k[0][0], s * k[0][1]], [s * k[1][0], s * k[1][1]]]
}

/// Lower Cholesky factor of a 2x2 PSD matrix, tolerating singularity.
pub(crate) fn cholesky_psd(k: [[f64; 2]; 2]) -> Result<(f64, f64, f64)> {
    let scale = k[0][0].abs().max(k[1][1].abs()).max(1.0);
    let asym = (k[0][1] - k[1][0]).abs();
    if !(asym <= PSD_TOL * scale) || !(k[0][0] >= -PSD_TOL * scale) || !(k[1][1] >= -PSD_TOL * scale) {
        return Err(Error::InvalidCovariance);
    }
    let off = 0.5 * (k[0][1] + k[1][0]);
    let l11 = k[0][0].max(0.0).sqrt();
    let l21 = if l11 > 0.0 { off / l11 } else { 0.0 };
    let rest = k[1][1] - l21 * l21;
    if rest < -PSD_TOL * scale || (l11 == 0.0 && off.abs() > PSD_TOL * scale) {
        return Err(Error::InvalidCovariance);
    }
    Ok((l11, l21, rest.max(0.0).sqrt()))
}
