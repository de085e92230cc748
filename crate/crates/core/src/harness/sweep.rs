use super::config::{measurements_for, sparsity_for, ExperimentConfig};
use super::metrics::{snr_db, success};
use super::problem::generate_problem;
use super::seeds::cell_seed;
use super::variant::{solve, Variant};
use crate::error::Result;
use crate::gamp::SolverOptions;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// One phase-transition cell for one variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PtcRecord {
    pub sigma: f64,
    pub rho: f64,
    pub variant: Variant,
    pub success_rate: f64,
    pub trials: usize,
    pub mean_iters: f64,
}

/// One SNR-sweep point for one variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnrRecord {
    #[serde(rename = "M")]
    pub m: usize,
    pub variant: Variant,
    pub mean_snr_db: f64,
    pub std_snr_db: f64,
    pub trials: usize,
}

/// Outcome of one variant on one problem. A solver error counts as a
/// failure at the iteration cap, with the all-zero estimate's SNR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub success: bool,
    pub snr_db: f64,
    pub iterations: usize,
}

fn run_trial(cfg: &ExperimentConfig, opts: &SolverOptions, m: usize, s: usize, seed: u64) -> Vec<TrialOutcome> {
    let failed = TrialOutcome { success: false, snr_db: 0.0, iterations: opts.max_iters };
    let problem = match generate_problem(cfg.n, m, s, cfg.signal_family, cfg.noise_scale, seed) {
        Ok(p) => p,
        Err(_) => return vec![failed; cfg.variants.len()],
    };
    cfg.variants
        .iter()
        .map(|v| {
            let res = match solve(*v, &problem, cfg.signal_family, s, cfg.noise_scale, cfg.components, opts) {
                Ok(r) => r,
                Err(_) => return failed,
            };
            match (success(&problem.x, &res.x_hat), snr_db(&problem.x, &res.x_hat)) {
                (Ok(ok), Ok(snr)) => TrialOutcome { success: ok, snr_db: snr, iterations: res.iterations_used },
                _ => failed,
            }
        })
        .collect()
}

/// Trial seeds of the cell at grid coordinates `(a, b)`.
pub fn trial_seeds(base: u64, a: f64, b: f64, trials: usize) -> Vec<u64> {
    (0..trials).map(|t| cell_seed(base, a, b, t)).collect()
}

/// Success rate of every variant over the `(sigma, rho)` grid.
pub fn run_ptc_sweep(cfg: &ExperimentConfig) -> Result<Vec<PtcRecord>> {
    cfg.validate_ptc()?;
    let opts = cfg.solver_options()?;
    let cells: Vec<(f64, f64)> =
        cfg.sigma_grid.iter().flat_map(|&sg| cfg.rho_grid.iter().map(move |&rh| (sg, rh))).collect();
    let jobs: Vec<(usize, usize)> = (0..cells.len()).flat_map(|c| (0..cfg.trials).map(move |t| (c, t))).collect();
    let outcomes: Vec<Vec<TrialOutcome>> = jobs
        .par_iter()
        .map(|&(c, t)| {
            let (sigma, rho) = cells[c];
            let m = measurements_for(cfg.n, sigma);
            run_trial(cfg, &opts, m, sparsity_for(m, rho), cell_seed(cfg.seed, sigma, rho, t))
        })
        .collect();

    let mut out = Vec::with_capacity(cells.len() * cfg.variants.len());
    for (c, &(sigma, rho)) in cells.iter().enumerate() {
        let block = &outcomes[c * cfg.trials..(c + 1) * cfg.trials];
        for (k, v) in cfg.variants.iter().enumerate() {
            let wins = block.iter().filter(|o| o[k].success).count();
            let iters: usize = block.iter().map(|o| o[k].iterations).sum();
            out.push(PtcRecord {
                sigma,
                rho,
                variant: *v,
                success_rate: wins as f64 / cfg.trials as f64,
                trials: cfg.trials,
                mean_iters: iters as f64 / cfg.trials as f64,
            });
        }
    }
    Ok(out)
}

/// Recovery SNR of every variant at fixed `S` over `m_grid`.
pub fn run_snr_sweep(cfg: &ExperimentConfig) -> Result<Vec<SnrRecord>> {
    cfg.validate_snr()?;
    let opts = cfg.solver_options()?;
    let jobs: Vec<(usize, usize)> =
        (0..cfg.m_grid.len()).flat_map(|c| (0..cfg.trials).map(move |t| (c, t))).collect();
    let outcomes: Vec<Vec<TrialOutcome>> = jobs
        .par_iter()
        .map(|&(c, t)| {
            let m = cfg.m_grid[c];
            run_trial(cfg, &opts, m, cfg.s, cell_seed(cfg.seed, m as f64, cfg.s as f64, t))
        })
        .collect();

    let mut out = Vec::new();
    for (c, &m) in cfg.m_grid.iter().enumerate() {
        let block = &outcomes[c * cfg.trials..(c + 1) * cfg.trials];
        for (k, v) in cfg.variants.iter().enumerate() {
            let snrs: Vec<f64> = block.iter().map(|o| o[k].snr_db).collect();
            let (mean, sd) = mean_std(&snrs);
            out.push(SnrRecord { m, variant: *v, mean_snr_db: mean, std_snr_db: sd, trials: cfg.trials });
        }
    }
    Ok(out)
}

/// Sample mean and (n - 1)-normalized standard deviation; 0 for one value.
pub fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
