//! Compressive recovery of a small grayscale image in a sparsifying basis.

use super::metrics::psnr_db;
use super::problem::{generate_matrix, measure};
use super::seeds::hash_words;
use super::variant::{solve, Variant};
use super::problem::SignalFamily;
use crate::error::{Error, Result};
use crate::gamp::SolverOptions;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Largest accepted image side.
pub const MAX_SIDE: usize = 64;

/// An orthonormal transform between pixels and coefficients.
pub trait SparsifyingBasis {
    fn forward(&self, pixels: &[f64]) -> Vec<f64>;
    fn inverse(&self, coefs: &[f64]) -> Vec<f64>;
}

/// Separable orthonormal 2-D DCT-II on a square image.
#[derive(Debug, Clone)]
pub struct Dct2 {
    side: usize,
    /// `c[k * side + i]`, basis vector `k` at sample `i`
    c: Vec<f64>,
}

impl Dct2 {
    pub fn new(side: usize) -> Self {
        let n = side as f64;
        let mut c = vec![0.0; side * side];
        for k in 0..side {
            let scale = if k == 0 { (1.0 / n).sqrt() } else { (2.0 / n).sqrt() };
            for i in 0..side {
                c[k * side + i] = scale * (std::f64::consts::PI * (2 * i + 1) as f64 * k as f64 / (2.0 * n)).cos();
            }
        }
        Dct2 { side, c }
    }

    /// `out = L * img * R` with `L`, `R` each `C` or its transpose.
    fn sandwich(&self, img: &[f64], left_t: bool, right_t: bool) -> Vec<f64> {
        let n = self.side;
        let at = |t: bool, a: usize, b: usize| if t { self.c[b * n + a] } else { self.c[a * n + b] };
        let mut tmp = vec![0.0; n * n];
        for r in 0..n {
            for col in 0..n {
                tmp[r * n + col] = (0..n).map(|k| at(left_t, r, k) * img[k * n + col]).sum();
            }
        }
        let mut out = vec![0.0; n * n];
        for r in 0..n {
            for col in 0..n {
                out[r * n + col] = (0..n).map(|k| tmp[r * n + k] * at(right_t, k, col)).sum();
            }
        }
        out
    }
}

impl SparsifyingBasis for Dct2 {
    fn forward(&self, pixels: &[f64]) -> Vec<f64> {
        self.sandwich(pixels, false, true)
    }

    fn inverse(&self, coefs: &[f64]) -> Vec<f64> {
        self.sandwich(coefs, true, false)
    }
}

/// Square grayscale image with values in `[0, 255]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    pub side: usize,
    pub pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(side: usize, pixels: Vec<f64>) -> Result<Self> {
        if side == 0 || side > MAX_SIDE {
            return Err(Error::Image(format!("side {side} outside [1, {MAX_SIDE}]")));
        }
        if pixels.len() != side * side {
            return Err(Error::Image(format!("{} pixels for a {side}x{side} image", pixels.len())));
        }
        Ok(GrayImage { side, pixels })
    }

    /// Any format the `image` crate reads (PNG, PGM), converted to 8-bit luma.
    pub fn load(path: &Path) -> Result<Self> {
        let img = image::open(path).map_err(|e| Error::Image(format!("{}: {e}", path.display())))?.to_luma8();
        let (w, h) = img.dimensions();
        if w != h {
            return Err(Error::Image(format!("image is {w}x{h}, not square")));
        }
        Self::new(w as usize, img.pixels().map(|p| p.0[0] as f64).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageRecord {
    pub sigma: f64,
    pub variant: Variant,
    pub psnr_db: f64,
    pub iterations: usize,
}

/// Measure the DCT coefficients of `img` with a row-normalized Gaussian
/// matrix at each `sigma` and recover them with PE-BGm and PE-Lasso. With
/// `snr_db` set, noise is added at that measurement SNR.
pub fn run_image_recovery(
    img: &GrayImage,
    sigma_grid: &[f64],
    snr_db: Option<f64>,
    components: usize,
    opts: &SolverOptions,
    seed: u64,
) -> Result<Vec<ImageRecord>> {
    if sigma_grid.is_empty() || sigma_grid.iter().any(|s| !(*s > 0.0 && *s <= 1.0)) {
        return Err(Error::Config("image sigma_grid entries must lie in (0, 1]".into()));
    }
    let basis = Dct2::new(img.side);
    let x = basis.forward(&img.pixels);
    let n = x.len();
    let mut out = Vec::new();
    for &sigma in sigma_grid {
        let m = ((sigma * n as f64).round() as usize).max(1);
        let cell = hash_words(&[seed, sigma.to_bits()]);
        let a = generate_matrix(m, n, hash_words(&[cell, 1]))?;
        let z_energy = {
            let z = a.apply(&x);
            z.iter().map(|v| v * v).sum::<f64>() / m as f64
        };
        let nu = snr_db.map_or(0.0, |db| (z_energy * 10f64.powf(-db / 10.0)).sqrt());
        let problem = measure(a, x.clone(), nu, hash_words(&[cell, 2]));
        for variant in [Variant::PeBgm, Variant::PeLasso] {
            let res = solve(variant, &problem, SignalFamily::Bg, 0, nu, components, opts)?;
            let recon = basis.inverse(&res.x_hat);
            out.push(ImageRecord {
                sigma,
                variant,
                psnr_db: psnr_db(&img.pixels, &recon)?,
                iterations: res.iterations_used,
            });
        }
    }
    Ok(out)
}
