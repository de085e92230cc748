use super::SensingOperator;
use crate::channels::{AwgnParams, BemParams, BgmParams, InputChannel, LaplaceParams};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Smallest initial scale, matching the default feasibility box.
const SCALE_FLOOR: f64 = 1e-8;
const INIT_SPARSITY: f64 = 0.1;
const INIT_NOISE_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PriorFamily {
    Bgm,
    Bem,
    Laplace,
}

fn energy(y: &[f64]) -> f64 {
    y.iter().map(|v| v * v).sum()
}

/// Component spread factors `2^(c - (C-1)/2)`: `{0.5, 1, 2}` for three components.
fn spread(components: usize) -> impl Iterator<Item = f64> {
    let mid = (components as f64 - 1.0) / 2.0;
    (0..components).map(move |c| 2f64.powf(c as f64 - mid))
}

/// `theta = 0.01 ||y||^2 / M`.
pub fn default_noise_params(y: &[f64]) -> Result<AwgnParams> {
    if y.is_empty() {
        return Err(Error::DimensionMismatch("empty measurement vector".into()));
    }
    Ok(AwgnParams { variance: (INIT_NOISE_FRACTION * energy(y) / y.len() as f64).max(SCALE_FLOOR) })
}

/// Data-scaled starting parameters for a prior family.
///
/// Sparsity starts at 0.1 with uniform weights. BGm means start at zero and
/// the variances match the measured energy left after the initial noise,
/// `(||y||^2 - M theta) / (sparsity ||A||_F^2)`, spread over the components.
/// BEm rates start at one, spread the same way; the Laplace rate at one.
pub fn default_input_params(
    family: PriorFamily,
    y: &[f64],
    a: &SensingOperator,
    components: usize,
) -> Result<InputChannel> {
    if components == 0 {
        return Err(Error::InvalidParams("mixture needs at least one component".into()));
    }
    let uniform = vec![1.0 / components as f64; components];
    Ok(match family {
        PriorFamily::Bgm => {
            let theta = default_noise_params(y)?.variance;
            let signal = (energy(y) - y.len() as f64 * theta).max(0.0);
            let base = (signal / (INIT_SPARSITY * a.frobenius_sq())).max(SCALE_FLOOR);
            InputChannel::Bgm(BgmParams {
                sparsity: INIT_SPARSITY,
                weights: uniform,
                means: vec![0.0; components],
                variances: spread(components).map(|f| (base * f).max(SCALE_FLOOR)).collect(),
            })
        }
        PriorFamily::Bem => InputChannel::Bem(BemParams {
            sparsity: INIT_SPARSITY,
            weights: uniform,
            rates: spread(components).collect(),
        }),
        PriorFamily::Laplace => InputChannel::Laplace(LaplaceParams { rate: 1.0 }),
    })
}
