//! MAP estimation of the channel parameters.
//!
//! Each parameter is moved by a one-dimensional line search on its own
//! log-evidence `h`, with every other parameter held at its latest value. Scale parameters (variances, rates, noise
//! variance) are searched in log space and mixture weights through softmax
//! logits.

mod evidence;
mod line_search;

pub use line_search::{line_search_maximize, LineSearchConfig, LineSearchSettings};

use crate::channels::{check_tau, AwgnParams, BemParams, BgmParams, InputChannel, LaplaceParams};
use crate::error::{Error, Result};
use crate::gamp::GampState;
use evidence::{awgn_evidence, exp_slab, gauss_slab, gauss_slab_at, laplace_evidence, softmax, SpikeSlab};
use serde::{Deserialize, Serialize};

/// Log-evidence of one parameter and its derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvidenceGradient {
    pub value: f64,
    pub gradient: f64,
}

/// Parameter selector for the BGm prior. `Weight(c)` differentiates with
/// respect to the softmax logit of component `c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BgmParam {
    Sparsity,
    Weight(usize),
    Mean(usize),
    Variance(usize),
}

/// Parameter selector for the BEm prior.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BemParam {
    Sparsity,
    Weight(usize),
    Rate(usize),
}

/// Feasibility boxes. Scale bounds apply to variances, rates and the noise
/// variance; logit bounds to the softmax logits of the mixture weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamBoxes {
    pub sparsity_min: f64,
    pub sparsity_max: f64,
    pub scale_min: f64,
    pub scale_max: f64,
    pub logit_min: f64,
    pub logit_max: f64,
}

impl Default for ParamBoxes {
    fn default() -> Self {
        Self {
            sparsity_min: 1e-6,
            sparsity_max: 1.0 - 1e-6,
            scale_min: 1e-8,
            scale_max: 1e8,
            logit_min: -10.0,
            logit_max: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamEstConfig {
    pub line_search: LineSearchSettings,
    pub boxes: ParamBoxes,
    pub estimate_noise: bool,
}

impl Default for ParamEstConfig {
    fn default() -> Self {
        Self { line_search: LineSearchSettings::default(), boxes: ParamBoxes::default(), estimate_noise: true }
    }
}

fn finite(eg: EvidenceGradient) -> Result<EvidenceGradient> {
    if eg.gradient.is_nan() || eg.value.is_nan() {
        Err(Error::DegenerateEvidence)
    } else {
        Ok(eg)
    }
}

fn check_component(c: usize, comps: usize) -> Result<()> {
    if c < comps {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("component {c} out of range")))
    }
}

fn bgm_table(p: &BgmParams, r: &[f64], tau: f64) -> SpikeSlab {
    SpikeSlab::new(p.sparsity, &p.weights, r, tau, |c, ri| gauss_slab(p.means[c], p.variances[c], ri, tau).0)
}

fn bem_table(p: &BemParams, r: &[f64], tau: f64) -> SpikeSlab {
    SpikeSlab::new(p.sparsity, &p.weights, r, tau, |c, ri| exp_slab(p.rates[c], ri, tau).0)
}

/// Evidence `sum_j ln p(r_j | params)` and its derivative in `which`.
pub fn evidence_and_grad_bgm(params: &BgmParams, which: BgmParam, r: &[f64], tau_r: f64) -> Result<EvidenceGradient> {
    check_tau(tau_r)?;
    params.validate()?;
    let table = bgm_table(params, r, tau_r);
    let eg = match which {
        BgmParam::Sparsity => table.sparsity_objective()(params.sparsity),
        BgmParam::Weight(c) => {
            check_component(c, params.components())?;
            table.logit_objective(c)(params.weights[c].ln())
        }
        BgmParam::Mean(c) => {
            check_component(c, params.components())?;
            let v = params.variances[c];
            table.component_objective(c, r, move |mu| {
                let at = gauss_slab_at(mu, v, tau_r);
                move |ri| {
                    let g = at(ri);
                    (g.0, g.1)
                }
            })(params.means[c])
        }
        BgmParam::Variance(c) => {
            check_component(c, params.components())?;
            let mu = params.means[c];
            table.component_objective(c, r, move |v| {
                let at = gauss_slab_at(mu, v, tau_r);
                move |ri| {
                    let g = at(ri);
                    (g.0, g.2)
                }
            })(params.variances[c])
        }
    };
    finite(eg)
}

pub fn evidence_and_grad_bem(params: &BemParams, which: BemParam, r: &[f64], tau_r: f64) -> Result<EvidenceGradient> {
    check_tau(tau_r)?;
    params.validate()?;
    let table = bem_table(params, r, tau_r);
    let eg = match which {
        BemParam::Sparsity => table.sparsity_objective()(params.sparsity),
        BemParam::Weight(c) => {
            check_component(c, params.components())?;
            table.logit_objective(c)(params.weights[c].ln())
        }
        BemParam::Rate(c) => {
            check_component(c, params.components())?;
            table.component_objective(c, r, move |a| move |ri| exp_slab(a, ri, tau_r))(params.rates[c])
        }
    };
    finite(eg)
}

pub fn evidence_and_grad_laplace(params: &LaplaceParams, r: &[f64], tau_r: f64) -> Result<EvidenceGradient> {
    check_tau(tau_r)?;
    params.validate()?;
    finite(laplace_evidence(params.rate, r, tau_r))
}

pub fn evidence_and_grad_awgn(params: &AwgnParams, q: &[f64], y: &[f64], tau_q: f64) -> Result<EvidenceGradient> {
    check_tau(tau_q)?;
    if !(params.variance > 0.0) {
        return Err(Error::OutOfFeasibilityBox);
    }
    if q.len() != y.len() {
        return Err(Error::DimensionMismatch(format!("q has {} entries, y has {}", q.len(), y.len())));
    }
    finite(awgn_evidence(params.variance, q, y, tau_q))
}

/// Maximize `f` over `ln p` in the scale box, returning `p`.
fn search_log<F>(f: F, start: f64, boxes: &ParamBoxes, ls: &LineSearchSettings) -> Result<f64>
where
    F: Fn(f64) -> EvidenceGradient,
{
    let (lo, hi) = (boxes.scale_min.ln(), boxes.scale_max.ln());
    let cfg = ls.for_box(lo, hi);
    let t = line_search_maximize(
        |t| {
            let p = t.exp();
            let eg = f(p);
            EvidenceGradient { value: eg.value, gradient: eg.gradient * p }
        },
        start.ln(),
        lo,
        hi,
        &cfg,
    )?;
    Ok(t.exp())
}

fn search_direct<F>(f: F, start: f64, lo: f64, hi: f64, ls: &LineSearchSettings) -> Result<f64>
where
    F: Fn(f64) -> EvidenceGradient,
{
    line_search_maximize(f, start, lo, hi, &ls.for_box(lo, hi))
}

/// Range of the pseudo-observations, used as the box for mixture means.
fn mean_box(r: &[f64]) -> (f64, f64) {
    let lo = r.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(lo < hi) {
        let m = if lo.is_finite() { lo } else { 0.0 };
        (m - 1.0, m + 1.0)
    } else {
        (lo, hi)
    }
}

fn update_bgm(p: &BgmParams, r: &[f64], tau: f64, cfg: &ParamEstConfig) -> Result<BgmParams> {
    let b = &cfg.boxes;
    let ls = &cfg.line_search;
    let mut out = p.clone();
    let table = |q: &BgmParams| bgm_table(q, r, tau);
    out.sparsity = search_direct(table(&out).sparsity_objective(), out.sparsity, b.sparsity_min, b.sparsity_max, ls)?;
    let comps = p.components();
    if comps > 1 {
        for c in 0..comps {
            let mut logits: Vec<f64> = out.weights.iter().map(|w| w.ln()).collect();
            logits[c] = search_direct(table(&out).logit_objective(c), logits[c], b.logit_min, b.logit_max, ls)?;
            out.weights = softmax(&logits);
        }
    }
    let (mlo, mhi) = mean_box(r);
    for c in 0..comps {
        let v = out.variances[c];
        let tb = table(&out);
        let f = tb.component_objective(c, r, move |mu| {
            let at = gauss_slab_at(mu, v, tau);
            move |ri| {
                let g = at(ri);
                (g.0, g.1)
            }
        });
        out.means[c] = search_direct(f, out.means[c], mlo, mhi, ls)?;
    }
    for c in 0..comps {
        let mu = out.means[c];
        let tb = table(&out);
        let f = tb.component_objective(c, r, move |v| {
            let at = gauss_slab_at(mu, v, tau);
            move |ri| {
                let g = at(ri);
                (g.0, g.2)
            }
        });
        out.variances[c] = search_log(f, out.variances[c], b, ls)?;
    }
    Ok(out)
}

fn update_bem(p: &BemParams, r: &[f64], tau: f64, cfg: &ParamEstConfig) -> Result<BemParams> {
    let b = &cfg.boxes;
    let ls = &cfg.line_search;
    let mut out = p.clone();
    let table = |q: &BemParams| bem_table(q, r, tau);
    out.sparsity = search_direct(table(&out).sparsity_objective(), out.sparsity, b.sparsity_min, b.sparsity_max, ls)?;
    let comps = p.components();
    if comps > 1 {
        for c in 0..comps {
            let mut logits: Vec<f64> = out.weights.iter().map(|w| w.ln()).collect();
            logits[c] = search_direct(table(&out).logit_objective(c), logits[c], b.logit_min, b.logit_max, ls)?;
            out.weights = softmax(&logits);
        }
    }
    for c in 0..comps {
        let tb = table(&out);
        let f = tb.component_objective(c, r, move |a| move |ri| exp_slab(a, ri, tau));
        out.rates[c] = search_log(f, out.rates[c], b, ls)?;
    }
    Ok(out)
}

/// New input-channel parameters from the pseudo-observations `r`.
pub fn update_input_params(input: &InputChannel, r: &[f64], tau_r: f64, cfg: &ParamEstConfig) -> Result<InputChannel> {
    check_tau(tau_r)?;
    input.validate()?;
    Ok(match input {
        InputChannel::Bgm(p) => InputChannel::Bgm(update_bgm(p, r, tau_r, cfg)?),
        InputChannel::Bem(p) => InputChannel::Bem(update_bem(p, r, tau_r, cfg)?),
        InputChannel::Laplace(p) => {
            let rate = search_log(|a| laplace_evidence(a, r, tau_r), p.rate, &cfg.boxes, &cfg.line_search)?;
            InputChannel::Laplace(LaplaceParams { rate })
        }
    })
}

/// New noise variance from the output-side quantities `(q, tau_q, y)`.
pub fn update_output_params(
    output: &AwgnParams,
    q: &[f64],
    tau_q: f64,
    y: &[f64],
    cfg: &ParamEstConfig,
) -> Result<AwgnParams> {
    check_tau(tau_q)?;
    output.validate()?;
    if q.len() != y.len() {
        return Err(Error::DimensionMismatch(format!("q has {} entries, y has {}", q.len(), y.len())));
    }
    let variance = search_log(|th| awgn_evidence(th, q, y, tau_q), output.variance, &cfg.boxes, &cfg.line_search)?;
    Ok(AwgnParams { variance })
}

/// One pass over every parameter in fixed order: sparsity, weights,
/// means or rates, variances, then the noise variance. Each search sees the
/// values already updated earlier in the pass. Nothing is returned unless
/// every search succeeds.
pub fn update_all_parameters(
    state: &GampState,
    y: &[f64],
    input: &InputChannel,
    output: &AwgnParams,
    cfg: &ParamEstConfig,
) -> Result<(InputChannel, AwgnParams)> {
    output.validate()?;
    let new_in = update_input_params(input, &state.r, state.tau_r, cfg)?;
    let new_out = if cfg.estimate_noise {
        update_output_params(output, &state.q, state.tau_q, y, cfg)?
    } else {
        *output
    };
    Ok((new_in, new_out))
}
