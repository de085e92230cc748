use super::{check_tau, PosteriorMoment};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Additive white Gaussian noise, `y = z + w` with `w ~ N(0, variance)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AwgnParams {
    pub variance: f64,
}

impl AwgnParams {
    pub fn validate(&self) -> Result<()> {
        if self.variance > 0.0 && self.variance.is_finite() {
            Ok(())
        } else {
            Err(Error::NonpositiveVariance)
        }
    }
}

/// Sum-product `g_out`. `mean` carries `s`, `variance` carries `tau_s`.
pub fn gout_awgn_sum_product(theta: &AwgnParams, q: f64, tau_q: f64, y: f64) -> Result<PosteriorMoment> {
    check_tau(tau_q)?;
    theta.validate()?;
    let inv = 1.0 / (theta.variance + tau_q);
    Ok(PosteriorMoment { mean: (y - q) * inv, variance: inv })
}

/// Max-sum `g_out`, built from the maximizing `z` and its sensitivity to `q`.
pub fn gout_awgn_max_sum(theta: &AwgnParams, q: f64, tau_q: f64, y: f64) -> Result<PosteriorMoment> {
    check_tau(tau_q)?;
    theta.validate()?;
    let th = theta.variance;
    let denom = th + tau_q;
    let z = (y * tau_q + q * th) / denom;
    let dz_dq = th / denom;
    let s = (z - q) / tau_q;
    let tau_s = (1.0 - dz_dq) / tau_q;
    if !(s.is_finite() && tau_s.is_finite()) {
        return Err(Error::NonpositivePseudoVariance);
    }
    Ok(PosteriorMoment { mean: s, variance: tau_s })
}
