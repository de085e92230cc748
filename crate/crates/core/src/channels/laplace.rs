use super::bem::truncated_slab;
use super::{check_tau, MixtureMoments, PosteriorMoment};
use crate::error::{Error, Result};
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

/// Laplace prior `rate/2 * exp(-rate |x|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplaceParams {
    pub rate: f64,
}

impl LaplaceParams {
    pub fn validate(&self) -> Result<()> {
        if self.rate > 0.0 && self.rate.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParams("laplace rate must be positive".into()))
        }
    }

    /// Posterior is a two-piece mixture: the positive half behaves like an
    /// exponential slab at `r`, the negative half like one at `-r`.
    pub(crate) fn posterior(&self, r: f64, tau: f64) -> PosteriorMoment {
        let pos = truncated_slab(self.rate, r, tau);
        let neg = truncated_slab(self.rate, -r, tau);
        let mut acc = MixtureMoments::new();
        acc.push(pos.ln_evidence, pos.mean, pos.variance);
        acc.push(neg.ln_evidence, -neg.mean, neg.variance);
        acc.reduce()
    }

    pub(crate) fn soft_threshold(&self, r: f64, tau: f64) -> PosteriorMoment {
        let t = self.rate * tau;
        if r.abs() > t {
            PosteriorMoment { mean: r - t * r.signum(), variance: tau }
        } else {
            PosteriorMoment { mean: 0.0, variance: 0.0 }
        }
    }

    pub(crate) fn draw<R: rand::Rng>(&self, rng: &mut R) -> f64 {
        let mag: f64 = Exp1.sample(rng);
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        sign * mag / self.rate
    }
}

/// Max-sum `g_in` for the Laplace prior: soft thresholding at `rate * tau_r`.
/// The variance is `tau_r` on the active side and 0 inside the dead zone.
pub fn gin_max_sum_laplace(prior: &LaplaceParams, r: f64, tau_r: f64) -> Result<PosteriorMoment> {
    check_tau(tau_r)?;
    prior.validate()?;
    Ok(prior.soft_threshold(r, tau_r))
}
