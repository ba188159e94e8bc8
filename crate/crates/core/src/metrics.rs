//! Image-quality metrics on magnitude volumes: squared-error, PSNR and
//! per-frame 2D SSIM.

use crate::error::{Error, Result};
use crate::volume::RealVolume;

fn check_dims(a: &RealVolume, b: &RealVolume, context: &'static str) -> Result<()> {
    if a.dims() != b.dims() {
        return Err(Error::ShapeMismatch {
            context,
            expected: format!("{:?}", a.dims()),
            got: format!("{:?}", b.dims()),
        });
    }
    Ok(())
}

/// Squared L2 error ||ref - rec||² (sum over all voxels).
pub fn mse(reference: &RealVolume, recon: &RealVolume) -> Result<f64> {
    check_dims(reference, recon, "mse")?;
    Ok(reference
        .data()
        .iter()
        .zip(recon.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum())
}

/// 20·log10(max(ref)·sqrt(N) / ||ref − rec||₂) in dB; +inf for identical
/// inputs.
pub fn psnr(reference: &RealVolume, recon: &RealVolume) -> Result<f64> {
    check_dims(reference, recon, "psnr")?;
    let peak = reference.max();
    if peak <= 0.0 {
        return Err(Error::Config(
            "psnr reference must have a positive maximum".into(),
        ));
    }
    let err = mse(reference, recon)?.sqrt();
    if err == 0.0 {
        return Ok(f64::INFINITY);
    }
    let n = reference.data().len() as f64;
    Ok(20.0 * (peak * n.sqrt() / err).log10())
}

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;
pub const SSIM_L: f64 = 1.0;

fn gaussian_window() -> Vec<f64> {
    let half = (SSIM_WINDOW / 2) as isize;
    let mut w = Vec::with_capacity(SSIM_WINDOW * SSIM_WINDOW);
    for i in -half..=half {
        for j in -half..=half {
            let r2 = (i * i + j * j) as f64;
            w.push((-r2 / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp());
        }
    }
    let sum: f64 = w.iter().sum();
    for v in &mut w {
        *v /= sum;
    }
    w
}

/// Mean per-frame 2D SSIM over all fully contained 11x11 Gaussian windows
/// (sigma 1.5, K1 0.01, K2 0.03, dynamic range 1.0).
pub fn ssim(reference: &RealVolume, recon: &RealVolume) -> Result<f64> {
    check_dims(reference, recon, "ssim")?;
    let (nx, ny, nt) = reference.dims();
    if nx < SSIM_WINDOW || ny < SSIM_WINDOW {
        return Err(Error::Config(format!(
            "ssim frames must be at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {nx}x{ny}"
        )));
    }
    let window = gaussian_window();
    let c1 = (SSIM_K1 * SSIM_L) * (SSIM_K1 * SSIM_L);
    let c2 = (SSIM_K2 * SSIM_L) * (SSIM_K2 * SSIM_L);
    let half = SSIM_WINDOW / 2;

    let mut total = 0.0;
    let mut count = 0usize;
    for t in 0..nt {
        for cx in half..nx - half {
            for cy in half..ny - half {
                let mut mu_a = 0.0;
                let mut mu_b = 0.0;
                let mut aa = 0.0;
                let mut bb = 0.0;
                let mut ab = 0.0;
                let mut wi = 0;
                for i in 0..SSIM_WINDOW {
                    for j in 0..SSIM_WINDOW {
                        let w = window[wi];
                        wi += 1;
                        let a = reference.get(cx + i - half, cy + j - half, t);
                        let b = recon.get(cx + i - half, cy + j - half, t);
                        mu_a += w * a;
                        mu_b += w * b;
                        aa += w * a * a;
                        bb += w * b * b;
                        ab += w * a * b;
                    }
                }
                let var_a = aa - mu_a * mu_a;
                let var_b = bb - mu_b * mu_b;
                let cov = ab - mu_a * mu_b;
                let s = ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2))
                    / ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
                total += s;
                count += 1;
            }
        }
    }
    Ok(total / count as f64)
}
