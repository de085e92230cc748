use super::{check_simplex, check_sparsity, pick_component, MixtureMoments, PosteriorMoment};
use crate::error::{Error, Result};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// Bernoulli / Gaussian-mixture prior:
/// `(1 - sparsity) delta(x) + sparsity * sum_c weights[c] N(x; means[c], variances[c])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BgmParams {
    pub sparsity: f64,
    pub weights: Vec<f64>,
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
}

impl BgmParams {
    pub fn validate(&self) -> Result<()> {
        check_sparsity(self.sparsity)?;
        check_simplex(&self.weights)?;
        let c = self.weights.len();
        if self.means.len() != c || self.variances.len() != c {
            return Err(Error::InvalidParams("bgm component lists differ in length".into()));
        }
        if self.means.iter().any(|m| !m.is_finite()) {
            return Err(Error::InvalidParams("non-finite bgm mean".into()));
        }
        if self.variances.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::NonpositiveVariance);
        }
        Ok(())
    }

    pub fn components(&self) -> usize {
        self.weights.len()
    }

    pub(crate) fn posterior(&self, r: f64, tau: f64) -> PosteriorMoment {
        let mut acc = MixtureMoments::new();
        let ln_spike = (1.0 - self.sparsity).ln() - r * r / (2.0 * tau);
        acc.push(ln_spike, 0.0, 0.0);
        let ln_sp = self.sparsity.ln();
        for c in 0..self.components() {
            let (mu, v) = (self.means[c], self.variances[c]);
            let s = v + tau;
            let lw = ln_sp + self.weights[c].ln() + ln_slab_gauss(mu, v, r, tau);
            acc.push(lw, (mu * tau + r * v) / s, v * tau / s);
        }
        acc.reduce()
    }

    pub(crate) fn prior_moments(&self) -> (f64, f64) {
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        for c in 0..self.components() {
            m1 += self.weights[c] * self.means[c];
            m2 += self.weights[c] * (self.variances[c] + self.means[c] * self.means[c]);
        }
        let mean = self.sparsity * m1;
        (mean, (self.sparsity * m2 - mean * mean).max(0.0))
    }

    pub(crate) fn draw<R: rand::Rng>(&self, rng: &mut R) -> f64 {
        let active: f64 = rng.random();
        if active >= self.sparsity {
            return 0.0;
        }
        let c = pick_component(&self.weights, rng);
        let z: f64 = StandardNormal.sample(rng);
        self.means[c] + self.variances[c].sqrt() * z
    }
}

#[inline]
pub(crate) fn ln_slab_gauss(mu: f64, v: f64, r: f64, tau: f64) -> f64 {
    let s = v + tau;
    let d = mu - r;
    -0.5 * (s / tau).ln() - d * d / (2.0 * s)
}
