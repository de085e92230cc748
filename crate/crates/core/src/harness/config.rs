use super::problem::SignalFamily;
use super::variant::Variant;
use crate::channels::{BgmParams, InputChannel};
use crate::error::{Error, Result};
use crate::gamp::SolverOptions;
use crate::state_evolution::SeConfig;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Every experiment setting in one flat table. Sweep keys, solver keys,
/// state-evolution keys (`se_*`) and file keys share the namespace so a
/// config file is a plain list of `key = value` lines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// signal length
    pub n: usize,
    /// `M / N` values
    pub sigma_grid: Vec<f64>,
    /// `S / M` values
    pub rho_grid: Vec<f64>,
    pub trials: usize,
    pub signal_family: SignalFamily,
    /// standard deviation of the additive noise
    pub noise_scale: f64,
    pub variants: Vec<Variant>,
    pub seed: u64,
    /// mixture components of the PE priors
    pub components: usize,

    /// measurement counts of an SNR sweep
    pub m_grid: Vec<usize>,
    /// sparsity of an SNR sweep
    pub s: usize,

    pub max_iters: usize,
    pub tol: f64,
    pub damping: f64,
    pub tau_min: f64,
    pub tau_max: f64,

    pub image: Option<PathBuf>,
    /// measurement SNR of image recovery; absent means noiseless
    pub image_snr_db: Option<f64>,

    pub matrix: Option<PathBuf>,
    pub measurements: Option<PathBuf>,

    pub se_beta: f64,
    pub se_sparsity: f64,
    pub se_noise: f64,
    pub se_mc_samples: usize,
    pub se_max_iters: usize,
    pub se_tol: f64,
    pub se_estimate: bool,
    pub se_square_xi: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let solver = SolverOptions::default();
        ExperimentConfig {
            n: 200,
            sigma_grid: desk_grid(),
            rho_grid: desk_grid(),
            trials: 10,
            signal_family: SignalFamily::Bg,
            noise_scale: 0.0,
            variants: vec![Variant::PeBgm, Variant::Oracle],
            seed: 0,
            components: 3,
            m_grid: vec![150, 200, 250, 300],
            s: 50,
            max_iters: solver.max_iters,
            tol: solver.tol,
            damping: solver.damping,
            tau_min: solver.tau_min,
            tau_max: solver.tau_max,
            image: None,
            image_snr_db: Some(30.0),
            matrix: None,
            measurements: None,
            se_beta: 2.0,
            se_sparsity: 0.1,
            se_noise: 1e-4,
            se_mc_samples: 100_000,
            se_max_iters: 100,
            se_tol: 1e-6,
            se_estimate: false,
            se_square_xi: true,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn solver_options(&self) -> Result<SolverOptions> {
        let opts = SolverOptions {
            max_iters: self.max_iters,
            tol: self.tol,
            damping: self.damping,
            tau_min: self.tau_min,
            tau_max: self.tau_max,
            ..SolverOptions::default()
        };
        opts.validate()?;
        Ok(opts)
    }

    fn check_common(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("n must be positive".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be positive".into()));
        }
        if self.variants.is_empty() {
            return Err(Error::Config("variants must not be empty".into()));
        }
        if self.components == 0 {
            return Err(Error::Config("components must be positive".into()));
        }
        if !(self.noise_scale >= 0.0 && self.noise_scale.is_finite()) {
            return Err(Error::Config("noise_scale must be non-negative".into()));
        }
        self.solver_options()?;
        Ok(())
    }

    /// Checks for a phase-transition sweep.
    pub fn validate_ptc(&self) -> Result<()> {
        self.check_common()?;
        check_grid("sigma_grid", &self.sigma_grid)?;
        check_grid("rho_grid", &self.rho_grid)?;
        for &sigma in &self.sigma_grid {
            let m = measurements_for(self.n, sigma);
            for &rho in &self.rho_grid {
                let s = sparsity_for(m, rho);
                if s == 0 || s > self.n {
                    return Err(Error::Config(format!("cell sigma={sigma}, rho={rho} has S={s}")));
                }
            }
        }
        Ok(())
    }

    /// Checks for an SNR sweep over `m_grid`.
    pub fn validate_snr(&self) -> Result<()> {
        self.check_common()?;
        if self.m_grid.is_empty() || self.m_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("m_grid must be non-empty and strictly increasing".into()));
        }
        if self.m_grid[0] == 0 {
            return Err(Error::Config("m_grid entries must be positive".into()));
        }
        if self.s == 0 || self.s > self.n {
            return Err(Error::Config(format!("s = {} must lie in [1, n]", self.s)));
        }
        Ok(())
    }

    /// State-evolution run described by the `se_*` keys, with a
    /// single-component Bernoulli-Gaussian prior.
    pub fn se_config(&self) -> Result<SeConfig> {
        let prior = InputChannel::Bgm(BgmParams {
            sparsity: self.se_sparsity,
            weights: vec![1.0],
            means: vec![0.0],
            variances: vec![1.0],
        });
        let mut cfg = SeConfig::oracle(prior, self.se_noise, self.se_beta, self.se_mc_samples, self.seed);
        cfg.max_iters = self.se_max_iters;
        cfg.tol = self.se_tol;
        cfg.estimate = self.se_estimate;
        cfg.square_xi = self.se_square_xi;
        if cfg.estimate {
            // the solver's data-scaled start in the large-system limit, where
            // ||y||^2 / M -> beta E[X^2] + theta and ||A||_F^2 -> N
            let energy = self.se_beta * self.se_sparsity + self.se_noise;
            let theta0 = (0.01 * energy).max(1e-8);
            cfg.init_noise.variance = theta0;
            cfg.init_input = InputChannel::Bgm(BgmParams {
                sparsity: 0.1,
                weights: vec![1.0],
                means: vec![0.0],
                variances: vec![((energy - theta0) / (0.1 * self.se_beta)).max(1e-8)],
            });
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn check_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Config(format!("{name} must not be empty")));
    }
    if grid.iter().any(|v| !(*v > 0.0 && *v < 1.0)) {
        return Err(Error::Config(format!("{name} entries must lie in (0, 1)")));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(format!("{name} must be strictly increasing")));
    }
    Ok(())
}

/// Ten cell centers `0.05, 0.15, ..., 0.95`.
pub fn desk_grid() -> Vec<f64> {
    (0..10).map(|i| (2 * i + 1) as f64 / 20.0).collect()
}

/// `M = round(sigma N)`, at least 1.
pub fn measurements_for(n: usize, sigma: f64) -> usize {
    ((sigma * n as f64).round() as usize).max(1)
}

/// `S = round(rho M)`.
pub fn sparsity_for(m: usize, rho: f64) -> usize {
    (rho * m as f64).round() as usize
}
