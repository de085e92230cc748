use crate::error::{Error, Result};

/// Success threshold on the relative error.
pub const SUCCESS_TOL: f64 = 1e-3;
/// Reported SNR for an exact reconstruction.
pub const SNR_CAP_DB: f64 = 300.0;

fn check_len(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() == b.len() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!("{} vs {} entries", a.len(), b.len())))
    }
}

fn err_norms(x: &[f64], x_hat: &[f64]) -> Result<(f64, f64)> {
    check_len(x, x_hat)?;
    let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if nx == 0.0 {
        return Err(Error::UndefinedRelativeError);
    }
    let ne = x.iter().zip(x_hat).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    Ok((nx, ne))
}

/// `||x - x_hat|| / ||x||`
pub fn relative_error(x: &[f64], x_hat: &[f64]) -> Result<f64> {
    let (nx, ne) = err_norms(x, x_hat)?;
    Ok(ne / nx)
}

/// Relative error strictly below `1e-3`.
pub fn success(x: &[f64], x_hat: &[f64]) -> Result<bool> {
    Ok(relative_error(x, x_hat)? < SUCCESS_TOL)
}

/// `20 log10(||x|| / ||x - x_hat||)`, capped at 300 dB.
pub fn snr_db(x: &[f64], x_hat: &[f64]) -> Result<f64> {
    let (nx, ne) = err_norms(x, x_hat)?;
    if ne == 0.0 {
        return Ok(SNR_CAP_DB);
    }
    Ok((20.0 * (nx / ne).log10()).min(SNR_CAP_DB))
}

/// Peak SNR for 8-bit images, capped at 300 dB.
pub fn psnr_db(img: &[f64], img_hat: &[f64]) -> Result<f64> {
    check_len(img, img_hat)?;
    if img.is_empty() {
        return Err(Error::EmptyReduction);
    }
    let mse = img.iter().zip(img_hat).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / img.len() as f64;
    if mse == 0.0 {
        return Ok(SNR_CAP_DB);
    }
    Ok((10.0 * (255.0 * 255.0 / mse).log10()).min(SNR_CAP_DB))
}
