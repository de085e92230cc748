use super::seeds::{derive, Stream};
use crate::error::{Error, Result};
use crate::gamp::SensingOperator;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

/// Distribution of the nonzero signal entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalFamily {
    /// standard normal nonzeros
    Bg,
    /// unit-rate exponential nonzeros
    Be,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub a: SensingOperator,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// noiseless part `A x`
    pub z: Vec<f64>,
}

/// I.i.d. Gaussian matrix with every row centered and scaled to unit norm.
pub fn generate_matrix(m: usize, n: usize, seed: u64) -> Result<SensingOperator> {
    if m == 0 || n == 0 {
        return Err(Error::DimensionMismatch("matrix needs M >= 1 and N >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data: Vec<f64> = (0..m * n).map(|_| StandardNormal.sample(&mut rng)).collect();
    for row in data.chunks_exact_mut(n) {
        let mean = row.iter().sum::<f64>() / n as f64;
        row.iter_mut().for_each(|v| *v -= mean);
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 1e-12) {
            return Err(Error::DegenerateRow);
        }
        row.iter_mut().for_each(|v| *v /= norm);
    }
    SensingOperator::new(m, n, data)
}

/// I.i.d. `N(0, 1/M)` matrix, the ensemble the state evolution describes.
pub fn generate_iid_matrix(m: usize, n: usize, seed: u64) -> Result<SensingOperator> {
    if m == 0 || n == 0 {
        return Err(Error::DimensionMismatch("matrix needs M >= 1 and N >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sd = 1.0 / (m as f64).sqrt();
    let data = (0..m * n).map(|_| { let g: f64 = StandardNormal.sample(&mut rng); sd * g }).collect::<Vec<f64>>();
    SensingOperator::new(m, n, data)
}

/// S-sparse signal with a uniformly chosen support.
pub fn generate_signal(n: usize, s: usize, family: SignalFamily, seed: u64) -> Result<Vec<f64>> {
    if s == 0 || s > n {
        return Err(Error::InfeasibleSparsity);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive(seed, Stream::Support));
    let support = sample(&mut rng, n, s);
    let mut vals = ChaCha8Rng::seed_from_u64(derive(seed, Stream::Values));
    let mut x = vec![0.0; n];
    for i in support.iter() {
        x[i] = match family {
            SignalFamily::Bg => StandardNormal.sample(&mut vals),
            SignalFamily::Be => Exp1.sample(&mut vals),
        };
    }
    Ok(x)
}

/// `y = A x + noise_scale * w` with a row-normalized Gaussian `A`.
pub fn generate_problem(
    n: usize,
    m: usize,
    s: usize,
    family: SignalFamily,
    noise_scale: f64,
    seed: u64,
) -> Result<Problem> {
    if !(noise_scale >= 0.0) {
        return Err(Error::Config("noise scale must be non-negative".into()));
    }
    let x = generate_signal(n, s, family, seed)?;
    let a = generate_matrix(m, n, derive(seed, Stream::Matrix))?;
    Ok(measure(a, x, noise_scale, seed))
}

/// Noisy measurements of `x` through `a`.
pub fn measure(a: SensingOperator, x: Vec<f64>, noise_scale: f64, seed: u64) -> Problem {
    let z = a.apply(&x);
    let mut rng = ChaCha8Rng::seed_from_u64(derive(seed, Stream::Noise));
    let y = z
        .iter()
        .map(|zi| {
            let w: f64 = StandardNormal.sample(&mut rng);
            zi + noise_scale * w
        })
        .collect();
    Problem { a, x, y, z }
}

/// `10 log10(||A x||^2 / ||y - A x||^2)`.
pub fn measurement_snr_db(p: &Problem) -> f64 {
    let sig: f64 = p.z.iter().map(|v| v * v).sum();
    let noise: f64 = p.z.iter().zip(&p.y).map(|(z, y)| (y - z) * (y - z)).sum();
    10.0 * (sig / noise).log10()
}
