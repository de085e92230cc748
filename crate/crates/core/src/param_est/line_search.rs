use super::EvidenceGradient;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Step and stopping controls for [`line_search_maximize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchConfig {
    pub shrink: f64,
    pub step_up: f64,
    pub step_down: f64,
    pub max_outer_iters: usize,
    pub convergence_tol: f64,
}

/// Box-relative line-search settings; [`LineSearchSettings::for_box`] turns them
/// into absolute steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSearchSettings {
    pub shrink: f64,
    pub step_fraction: f64,
    pub max_outer_iters: usize,
    pub tol_fraction: f64,
}

impl Default for LineSearchSettings {
    fn default() -> Self {
        Self { shrink: 0.5, step_fraction: 0.05, max_outer_iters: 20, tol_fraction: 1e-6 }
    }
}

impl LineSearchSettings {
    pub fn for_box(&self, lo: f64, hi: f64) -> LineSearchConfig {
        let w = hi - lo;
        LineSearchConfig {
            shrink: self.shrink,
            step_up: self.step_fraction * w,
            step_down: -self.step_fraction * w,
            max_outer_iters: self.max_outer_iters,
            convergence_tol: self.tol_fraction * w,
        }
    }
}

impl LineSearchConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.shrink > 0.0
            && self.shrink < 1.0
            && self.step_up > 0.0
            && self.step_down < 0.0
            && self.max_outer_iters > 0
            && self.convergence_tol > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams("line search config out of range".into()))
        }
    }
}

/// Inner shrink attempts before the probe direction is abandoned.
const MAX_SHRINKS: usize = 64;

/// Sign-driven ascent on a scalar objective inside `[lo, hi]`.
///
/// Each outer step probes `eta_+` or `eta_-` along the gradient sign and
/// shrinks that step by `shrink` until the objective improves on the previous
/// iterate. Shrunk steps carry over to later outer steps. If shrinking fails to
/// find a better point the previous iterate is kept.
pub fn line_search_maximize<F>(mut f: F, start: f64, lo: f64, hi: f64, cfg: &LineSearchConfig) -> Result<f64>
where
    F: FnMut(f64) -> EvidenceGradient,
{
    cfg.validate()?;
    if !(lo < hi) {
        return Err(Error::OutOfFeasibilityBox);
    }
    let eps = 1e-12 * (hi - lo);
    let (lo, hi) = (lo + eps, hi - eps);
    if !start.is_finite() {
        return Err(Error::InvalidStart);
    }
    let clamp = |x: f64| x.clamp(lo, hi);
    let mut x = clamp(start);
    let mut cur = f(x);
    if !cur.value.is_finite() {
        return Err(Error::InvalidStart);
    }
    let mut up = cfg.step_up;
    let mut down = cfg.step_down;
    for _ in 0..cfg.max_outer_iters {
        if cur.gradient.is_nan() {
            return Err(Error::DegenerateEvidence);
        }
        let step = if cur.gradient > 0.0 {
            &mut up
        } else if cur.gradient < 0.0 {
            &mut down
        } else {
            break;
        };
        let mut cand = clamp(x + *step);
        let mut next = f(cand);
        let mut shrinks = 0;
        // a tie in floating point is rounding, not ascent
        while !(next.value > cur.value) {
            if shrinks == MAX_SHRINKS || step.abs() < cfg.convergence_tol || cand == x {
                return Ok(x);
            }
            *step *= cfg.shrink;
            cand = clamp(x + *step);
            next = f(cand);
            shrinks += 1;
        }
        let moved = (cand - x).abs();
        x = cand;
        cur = next;
        if moved < cfg.convergence_tol {
            break;
        }
    }
    Ok(x)
}
