//! Input and output channels.
//!
//! An input channel is the prior `p(x | lambda)`; its sum-product estimator
//! `g_in` returns the posterior mean and variance of `x` under the prior times
//! the Gaussian pseudo-likelihood `N(x; r, tau_r)`. The output channel is the
//! AWGN likelihood `p(y | z, theta)`; `g_out` returns the score `s` and the
//! curvature `tau_s` of its log-evidence at `q`.

mod awgn;
mod bem;
mod bgm;
mod laplace;

pub use awgn::{gout_awgn_max_sum, gout_awgn_sum_product, AwgnParams};
pub use bem::BemParams;
pub use bgm::BgmParams;
pub use laplace::{gin_max_sum_laplace, LaplaceParams};

use crate::error::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Tolerance on the mixture-weight simplex constraint.
pub const WEIGHT_SUM_TOL: f64 = 1e-10;

/// Posterior mean and variance returned by the scalar estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosteriorMoment {
    pub mean: f64,
    pub variance: f64,
}

/// Which loopy-BP family the estimator approximates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MessagePassing {
    SumProduct,
    MaxSum,
}

/// Sparse prior on the signal coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum InputChannel {
    Bgm(BgmParams),
    Bem(BemParams),
    Laplace(LaplaceParams),
}

impl InputChannel {
    pub fn validate(&self) -> Result<()> {
        match self {
            InputChannel::Bgm(p) => p.validate(),
            InputChannel::Bem(p) => p.validate(),
            InputChannel::Laplace(p) => p.validate(),
        }
    }

    /// Sum-product `g_in`: posterior mean and variance of `x`.
    pub fn gin_sum_product(&self, r: f64, tau_r: f64) -> Result<PosteriorMoment> {
        check_tau(tau_r)?;
        self.validate()?;
        Ok(self.gin_unchecked(r, tau_r))
    }

    /// Max-sum `g_in`. Only the Laplace prior has a non-degenerate MAP denoiser.
    pub fn gin_max_sum(&self, r: f64, tau_r: f64) -> Result<PosteriorMoment> {
        match self {
            InputChannel::Laplace(p) => gin_max_sum_laplace(p, r, tau_r),
            _ => Err(Error::UnsupportedMaxSum),
        }
    }

    pub(crate) fn gin_unchecked(&self, r: f64, tau_r: f64) -> PosteriorMoment {
        match self {
            InputChannel::Bgm(p) => p.posterior(r, tau_r),
            InputChannel::Bem(p) => p.posterior(r, tau_r),
            InputChannel::Laplace(p) => p.posterior(r, tau_r),
        }
    }

    /// Element-wise `g_in` over a vector, validating once.
    pub fn gin_sweep(
        &self,
        family: MessagePassing,
        r: &[f64],
        tau_r: f64,
        mean: &mut [f64],
        variance: &mut [f64],
    ) -> Result<()> {
        check_tau(tau_r)?;
        self.validate()?;
        match family {
            MessagePassing::SumProduct => {
                for ((ri, m), v) in r.iter().zip(mean.iter_mut()).zip(variance.iter_mut()) {
                    let pm = self.gin_unchecked(*ri, tau_r);
                    *m = pm.mean;
                    *v = pm.variance;
                }
            }
            MessagePassing::MaxSum => {
                let InputChannel::Laplace(p) = self else {
                    return Err(Error::UnsupportedMaxSum);
                };
                for ((ri, m), v) in r.iter().zip(mean.iter_mut()).zip(variance.iter_mut()) {
                    let pm = p.soft_threshold(*ri, tau_r);
                    *m = pm.mean;
                    *v = pm.variance;
                }
            }
        }
        Ok(())
    }

    pub fn prior_mean(&self) -> f64 {
        match self {
            InputChannel::Bgm(p) => p.prior_moments().0,
            InputChannel::Bem(p) => p.prior_moments().0,
            InputChannel::Laplace(_) => 0.0,
        }
    }

    pub fn prior_variance(&self) -> f64 {
        match self {
            InputChannel::Bgm(p) => p.prior_moments().1,
            InputChannel::Bem(p) => p.prior_moments().1,
            InputChannel::Laplace(p) => 2.0 / (p.rate * p.rate),
        }
    }

    /// I.i.d. draws from the prior, deterministic in `seed`.
    pub fn sample_prior(&self, count: usize, seed: u64) -> Result<Vec<f64>> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(self.sample_with(count, &mut rng))
    }

    pub(crate) fn sample_with<R: rand::Rng>(&self, count: usize, rng: &mut R) -> Vec<f64> {
        (0..count)
            .map(|_| match self {
                InputChannel::Bgm(p) => p.draw(rng),
                InputChannel::Bem(p) => p.draw(rng),
                InputChannel::Laplace(p) => p.draw(rng),
            })
            .collect()
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            InputChannel::Bgm(_) => "bgm",
            InputChannel::Bem(_) => "bem",
            InputChannel::Laplace(_) => "laplace",
        }
    }
}

pub(crate) fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::NonpositivePseudoVariance)
    }
}

pub(crate) fn check_simplex(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::InvalidParams("mixture needs at least one component".into()));
    }
    if weights.iter().any(|w| !(0.0..=1.0).contains(w)) {
        return Err(Error::InvalidParams("mixture weight outside [0, 1]".into()));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(Error::InvalidParams(format!("mixture weights sum to {sum}")));
    }
    Ok(())
}

pub(crate) fn check_sparsity(sparsity: f64) -> Result<()> {
    if (0.0..=1.0).contains(&sparsity) {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("sparsity {sparsity} outside [0, 1]")))
    }
}

/// Pick a mixture component index from a uniform draw.
pub(crate) fn pick_component<R: rand::Rng>(weights: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (c, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return c;
        }
    }
    weights.len() - 1
}

/// Accumulates a spike at zero plus weighted components given in log weight,
/// then reduces to the mixture mean and variance.
pub(crate) struct MixtureMoments {
    entries: [(f64, f64, f64); MIXTURE_STACK],
    len: usize,
    overflow: Vec<(f64, f64, f64)>,
}

const MIXTURE_STACK: usize = 9;

impl MixtureMoments {
    pub(crate) fn new() -> Self {
        Self { entries: [(0.0, 0.0, 0.0); MIXTURE_STACK], len: 0, overflow: Vec::new() }
    }

    /// Add a component with log weight, mean and variance.
    pub(crate) fn push(&mut self, ln_weight: f64, mean: f64, variance: f64) {
        if self.len < MIXTURE_STACK {
            self.entries[self.len] = (ln_weight, mean, variance);
            self.len += 1;
        } else {
            self.overflow.push((ln_weight, mean, variance));
        }
    }

    pub(crate) fn reduce(&self) -> PosteriorMoment {
        let all = || self.entries[..self.len].iter().chain(self.overflow.iter());
        let max = all().map(|e| e.0).fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return PosteriorMoment { mean: 0.0, variance: 0.0 };
        }
        let mut total = 0.0;
        let mut first = 0.0;
        for &(lw, m, _) in all() {
            let w = (lw - max).exp();
            total += w;
            first += w * m;
        }
        let mean = first / total;
        let mut second = 0.0;
        for &(lw, m, v) in all() {
            let w = (lw - max).exp();
            let d = m - mean;
            second += w * (v + d * d);
        }
        PosteriorMoment { mean, variance: (second / total).max(0.0) }
    }
}
