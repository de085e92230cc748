//! Log-evidence of the shared parameters and its derivatives.
//!
//! For a spike-and-slab prior the per-entry evidence is
//! `(1 - l) k1_j + l sum_c w_c k2_j(c)`; everything is carried in the log
//! domain with the common `1/sqrt(2 pi tau)` factor pulled out.

use super::EvidenceGradient;
use crate::special_fn::{ln_erfcx, log_add_exp, log_sum_exp, truncated_std_normal};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Snapshot of per-entry log factors for a spike-and-slab prior.
pub(crate) struct SpikeSlab {
    comps: usize,
    ln_spike: Vec<f64>,
    /// row-major, entry j component c at `j * comps + c`
    ln_slab: Vec<f64>,
    ln_sparsity: f64,
    ln_one_minus: f64,
    ln_w: Vec<f64>,
    /// `-1/2 ln(2 pi tau)` summed over entries
    offset: f64,
}

impl SpikeSlab {
    pub(crate) fn new(
        sparsity: f64,
        weights: &[f64],
        r: &[f64],
        tau: f64,
        slab: impl Fn(usize, f64) -> f64,
    ) -> Self {
        let comps = weights.len();
        let ln_spike = r.iter().map(|ri| -ri * ri / (2.0 * tau)).collect();
        let mut ln_slab = Vec::with_capacity(r.len() * comps);
        for &ri in r {
            for c in 0..comps {
                ln_slab.push(slab(c, ri));
            }
        }
        Self {
            comps,
            ln_spike,
            ln_slab,
            ln_sparsity: sparsity.ln(),
            ln_one_minus: (-sparsity).ln_1p(),
            ln_w: weights.iter().map(|w| w.ln()).collect(),
            offset: -0.5 * (2.0 * PI * tau).ln() * r.len() as f64,
        }
    }

    fn row(&self, j: usize) -> &[f64] {
        &self.ln_slab[j * self.comps..(j + 1) * self.comps]
    }

    /// `ln sum_{k in ks} exp(ln_w_k + ln_slab_jk)` for entry j, skipping `skip`.
    fn slab_mixture(&self, j: usize, skip: Option<usize>) -> f64 {
        let row = self.row(j);
        let mut acc = f64::NEG_INFINITY;
        for c in 0..self.comps {
            if Some(c) != skip {
                acc = log_add_exp(acc, self.ln_w[c] + row[c]);
            }
        }
        acc
    }

    /// Objective in the sparsity itself.
    pub(crate) fn sparsity_objective(&self) -> impl Fn(f64) -> EvidenceGradient + '_ {
        let mix: Vec<f64> = (0..self.ln_spike.len()).map(|j| self.slab_mixture(j, None)).collect();
        move |lambda: f64| {
            let ln_l = lambda.ln();
            let ln_1m = (-lambda).ln_1p();
            let mut value = self.offset;
            let mut grad = 0.0;
            for (sp, m) in self.ln_spike.iter().zip(&mix) {
                let (total, pi0) = add_with_share(ln_l + m, ln_1m + sp);
                value += total;
                grad += (1.0 - pi0) / lambda - pi0 / (1.0 - lambda);
            }
            EvidenceGradient { value, gradient: grad }
        }
    }

    /// Objective in the softmax logit `omega_c`, the other logits held at `ln w_k`.
    pub(crate) fn logit_objective(&self, c: usize) -> impl Fn(f64) -> EvidenceGradient + '_ {
        let others: f64 = self.ln_w.iter().enumerate().filter(|(k, _)| *k != c).map(|(_, l)| l.exp()).sum();
        let rest: Vec<f64> = (0..self.ln_spike.len()).map(|j| self.slab_mixture(j, Some(c))).collect();
        move |omega: f64| {
            let ln_den = log_add_exp(omega, others.ln());
            let w_c = (omega - ln_den).exp();
            let mut value = self.offset;
            let mut grad = 0.0;
            for j in 0..self.ln_spike.len() {
                let own = omega + self.row(j)[c];
                let slab = self.ln_sparsity + log_add_exp(own, rest[j]) - ln_den;
                let spike = self.ln_one_minus + self.ln_spike[j];
                let total = log_add_exp(spike, slab);
                value += total;
                if others > 0.0 {
                    let pi_c = (self.ln_sparsity + own - ln_den - total).exp();
                    let pi_slab = (slab - total).exp();
                    grad += pi_c - w_c * pi_slab;
                }
            }
            EvidenceGradient { value, gradient: grad }
        }
    }

    /// Objective in one parameter of component `c`. `slab(p)` returns, for
    /// that parameter value, a map from `r` to the component's log factor and
    /// its derivative in `p`.
    pub(crate) fn component_objective<'a, F, G>(
        &'a self,
        c: usize,
        r: &'a [f64],
        slab: F,
    ) -> impl Fn(f64) -> EvidenceGradient + 'a
    where
        F: Fn(f64) -> G + 'a,
        G: Fn(f64) -> (f64, f64),
    {
        let rest: Vec<f64> = (0..self.ln_spike.len())
            .map(|j| {
                log_add_exp(
                    self.ln_one_minus + self.ln_spike[j],
                    self.ln_sparsity + self.slab_mixture(j, Some(c)),
                )
            })
            .collect();
        let ln_lw = self.ln_sparsity + self.ln_w[c];
        move |p: f64| {
            let at = slab(p);
            let mut value = self.offset;
            let mut grad = 0.0;
            for (rj, restj) in r.iter().zip(&rest) {
                let (ln_k, d_ln_k) = at(*rj);
                let (total, pi_c) = add_with_share(*restj, ln_lw + ln_k);
                value += total;
                if pi_c > 0.0 {
                    grad += pi_c * d_ln_k;
                }
            }
            EvidenceGradient { value, gradient: grad }
        }
    }
}

/// `ln(e^rest + e^own)` together with the share `e^own / (e^rest + e^own)`.
#[inline]
fn add_with_share(rest: f64, own: f64) -> (f64, f64) {
    if own == f64::NEG_INFINITY {
        return (rest, 0.0);
    }
    if own >= rest {
        let e = (rest - own).exp();
        (own + e.ln_1p(), 1.0 / (1.0 + e))
    } else {
        let e = (own - rest).exp();
        (rest + e.ln_1p(), e / (1.0 + e))
    }
}

/// Gaussian slab as a function of `r` at fixed `(mu, v)`: the log factor with
/// its derivatives in `mu` and `v`.
#[inline]
pub(crate) fn gauss_slab_at(mu: f64, v: f64, tau: f64) -> impl Fn(f64) -> (f64, f64, f64) {
    let s = v + tau;
    let head = -0.5 * (s / tau).ln();
    move |r| {
        let d = r - mu;
        let q = d * d / s;
        (head - 0.5 * q, d / s, 0.5 * (q - 1.0) / s)
    }
}

/// Gaussian slab factor `ln N(r; mu, v + tau) + 1/2 ln(2 pi tau)` and its
/// derivatives in `mu` and `v`.
#[inline]
pub(crate) fn gauss_slab(mu: f64, v: f64, r: f64, tau: f64) -> (f64, f64, f64) {
    let s = v + tau;
    let d = r - mu;
    let q = d * d / s;
    let ln_k = -0.5 * (s / tau).ln() - 0.5 * q;
    (ln_k, d / s, 0.5 * (q - 1.0) / s)
}

/// Exponential slab factor and its derivative in the rate.
#[inline]
pub(crate) fn exp_slab(rate: f64, r: f64, tau: f64) -> (f64, f64) {
    let sd = tau.sqrt();
    let alpha = (rate * tau - r) / sd;
    let (offset, _) = truncated_std_normal(alpha);
    let ln_k = -r * r / (2.0 * tau) + rate.ln() + 0.5 * (PI * tau / 2.0).ln() + ln_erfcx(alpha * FRAC_1_SQRT_2);
    // d/da ln k = 1/a - E[x | component]
    (ln_k, 1.0 / rate - sd * offset)
}

/// Laplace evidence summed over entries, with its derivative in the rate.
pub(crate) fn laplace_evidence(rate: f64, r: &[f64], tau: f64) -> EvidenceGradient {
    let sd = tau.sqrt();
    let ln_quarter = (rate / 4.0).ln();
    let mut value = -0.5 * (2.0 * PI * tau).ln() * r.len() as f64;
    let mut grad = 0.0;
    for &ri in r {
        let a_pos = (rate * tau - ri) / sd;
        let a_neg = (rate * tau + ri) / sd;
        let l_pos = ln_erfcx(a_pos * FRAC_1_SQRT_2);
        let l_neg = ln_erfcx(a_neg * FRAC_1_SQRT_2);
        let lse = log_add_exp(l_pos, l_neg);
        value += ln_quarter - ri * ri / (2.0 * tau) + lse;
        let p_pos = (l_pos - lse).exp();
        let p_neg = (l_neg - lse).exp();
        let e_abs = sd * (p_pos * truncated_std_normal(a_pos).0 + p_neg * truncated_std_normal(a_neg).0);
        grad += 1.0 / rate - e_abs;
    }
    EvidenceGradient { value, gradient: grad }
}

/// AWGN evidence in the noise variance, `tau_q`-only constants dropped.
pub(crate) fn awgn_evidence(theta: f64, q: &[f64], y: &[f64], tau_q: f64) -> EvidenceGradient {
    let s = theta + tau_q;
    let mut sq = 0.0;
    for (qi, yi) in q.iter().zip(y) {
        let d = yi - qi;
        sq += d * d;
    }
    let m = q.len() as f64;
    EvidenceGradient {
        value: -0.5 * m * s.ln() - sq / (2.0 * s),
        gradient: sq / (2.0 * s * s) - m / (2.0 * s),
    }
}

/// Softmax of the logits, computed with max subtraction.
pub(crate) fn softmax(logits: &[f64]) -> Vec<f64> {
    let lse = log_sum_exp(logits).unwrap_or(0.0);
    logits.iter().map(|l| (l - lse).exp()).collect()
}
