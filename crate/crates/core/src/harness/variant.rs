use super::problem::{Problem, SignalFamily};
use crate::channels::{AwgnParams, BemParams, BgmParams, InputChannel};
use crate::error::{Error, Result};
use crate::gamp::{
    default_input_params, default_noise_params, run_oracle_gamp, run_pe_gamp, run_pe_lasso, PriorFamily,
    RecoveryResult, SolverOptions,
};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Noise variance handed to the oracle on noiseless problems, where the
/// true value 0 is outside the channel's domain.
pub const ORACLE_NOISE_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    PeBgm,
    PeBem,
    PeLasso,
    Oracle,
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::PeBgm => "pe_bgm",
            Variant::PeBem => "pe_bem",
            Variant::PeLasso => "pe_lasso",
            Variant::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pe_bgm" => Ok(Variant::PeBgm),
            "pe_bem" => Ok(Variant::PeBem),
            "pe_lasso" => Ok(Variant::PeLasso),
            "oracle" => Ok(Variant::Oracle),
            other => Err(Error::Config(format!("unknown variant '{other}'"))),
        }
    }
}

/// The generating prior and noise of a problem family.
pub fn true_channels(family: SignalFamily, n: usize, s: usize, noise_scale: f64) -> (InputChannel, AwgnParams) {
    let sparsity = s as f64 / n as f64;
    let input = match family {
        SignalFamily::Bg => {
            InputChannel::Bgm(BgmParams { sparsity, weights: vec![1.0], means: vec![0.0], variances: vec![1.0] })
        }
        SignalFamily::Be => InputChannel::Bem(BemParams { sparsity, weights: vec![1.0], rates: vec![1.0] }),
    };
    let noise = AwgnParams { variance: (noise_scale * noise_scale).max(ORACLE_NOISE_FLOOR) };
    (input, noise)
}

/// Solve one problem with one variant.
pub fn solve(
    variant: Variant,
    problem: &Problem,
    family: SignalFamily,
    sparsity_count: usize,
    noise_scale: f64,
    components: usize,
    opts: &SolverOptions,
) -> Result<RecoveryResult> {
    let (a, y) = (&problem.a, &problem.y);
    match variant {
        Variant::PeBgm | Variant::PeBem => {
            let fam = if variant == Variant::PeBgm { PriorFamily::Bgm } else { PriorFamily::Bem };
            let input = default_input_params(fam, y, a, components)?;
            let noise = default_noise_params(y)?;
            let opts = SolverOptions { oracle: false, ..*opts };
            run_pe_gamp(a, y, &input, &noise, &opts)
        }
        Variant::PeLasso => run_pe_lasso(a, y, opts),
        Variant::Oracle => {
            let (input, noise) = true_channels(family, a.cols(), sparsity_count, noise_scale);
            run_oracle_gamp(a, y, &input, &noise, opts)
        }
    }
}
