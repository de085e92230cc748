use super::{check_simplex, check_sparsity, pick_component, MixtureMoments, PosteriorMoment};
use crate::error::{Error, Result};
use crate::special_fn::{ln_erfcx, truncated_std_normal};
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Bernoulli / exponential-mixture prior on `x >= 0`:
/// `(1 - sparsity) delta(x) + sparsity * sum_c weights[c] rates[c] exp(-rates[c] x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BemParams {
    pub sparsity: f64,
    pub weights: Vec<f64>,
    pub rates: Vec<f64>,
}

/// Slab component posterior: a `N(r - a tau, tau)` truncated to `x >= 0`.
pub(crate) struct TruncatedSlab {
    /// log evidence scaled by `sqrt(2 pi tau)`
    pub ln_evidence: f64,
    pub mean: f64,
    pub variance: f64,
}

impl BemParams {
    pub fn validate(&self) -> Result<()> {
        check_sparsity(self.sparsity)?;
        check_simplex(&self.weights)?;
        if self.rates.len() != self.weights.len() {
            return Err(Error::InvalidParams("bem component lists differ in length".into()));
        }
        if self.rates.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return Err(Error::InvalidParams("bem rates must be positive".into()));
        }
        Ok(())
    }

    pub fn components(&self) -> usize {
        self.weights.len()
    }

    pub(crate) fn posterior(&self, r: f64, tau: f64) -> PosteriorMoment {
        let mut acc = MixtureMoments::new();
        acc.push((1.0 - self.sparsity).ln() - r * r / (2.0 * tau), 0.0, 0.0);
        let ln_sp = self.sparsity.ln();
        for c in 0..self.components() {
            let slab = truncated_slab(self.rates[c], r, tau);
            acc.push(ln_sp + self.weights[c].ln() + slab.ln_evidence, slab.mean, slab.variance);
        }
        acc.reduce()
    }

    pub(crate) fn prior_moments(&self) -> (f64, f64) {
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        for (w, a) in self.weights.iter().zip(&self.rates) {
            m1 += w / a;
            m2 += 2.0 * w / (a * a);
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
        // rates are validated positive
        Exp::new(self.rates[c]).map(|d| d.sample(rng)).unwrap_or(0.0)
    }
}

/// Evidence and moments of `a exp(-a x) 1{x >= 0}` against `N(x; r, tau)`.
pub(crate) fn truncated_slab(rate: f64, r: f64, tau: f64) -> TruncatedSlab {
    let sd = tau.sqrt();
    let alpha = (rate * tau - r) / sd;
    let (offset, var) = truncated_std_normal(alpha);
    TruncatedSlab {
        ln_evidence: -r * r / (2.0 * tau)
            + rate.ln()
            + 0.5 * (PI * tau / 2.0).ln()
            + ln_erfcx(alpha * FRAC_1_SQRT_2),
        mean: sd * offset,
        variance: tau * var,
    }
}
