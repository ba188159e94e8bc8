//! Evaluation reports and image emission: per-example metric rows with
//! aggregates, error maps, y-t extractions and binary PGM output.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::RealVolume;

/// A simple 8-bit grayscale image (row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl GrayImage {
    pub fn write_pgm(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        write!(f, "P5\n{} {}\n255\n", self.width, self.height)?;
        f.write_all(&self.pixels)?;
        Ok(())
    }
}

/// |ref − rec| clipped to [0, display_max] and linearly mapped to 8 bit,
/// one image per frame. Half-way values round away from zero (127.5 -> 128).
pub fn error_map(
    reference: &RealVolume,
    recon: &RealVolume,
    display_max: f64,
) -> Result<Vec<GrayImage>> {
    if reference.dims() != recon.dims() {
        return Err(Error::ShapeMismatch {
            context: "error_map",
            expected: format!("{:?}", reference.dims()),
            got: format!("{:?}", recon.dims()),
        });
    }
    let (nx, ny, nt) = reference.dims();
    let mut frames = Vec::with_capacity(nt);
    for t in 0..nt {
        let mut pixels = Vec::with_capacity(nx * ny);
        for x in 0..nx {
            for y in 0..ny {
                let d = (reference.get(x, y, t) - recon.get(x, y, t)).abs();
                let clipped = d.min(display_max).max(0.0);
                pixels.push((clipped / display_max * 255.0).round() as u8);
            }
        }
        frames.push(GrayImage {
            width: ny,
            height: nx,
            pixels,
        });
    }
    Ok(frames)
}

/// Fixed-x slice across all frames: a (ny x nt) matrix revealing temporal
/// motion fidelity.
pub fn yt_extract(volume: &RealVolume, x_index: usize) -> Result<Vec<f64>> {
    let (nx, ny, nt) = volume.dims();
    if x_index >= nx {
        return Err(Error::IndexOutOfRange {
            context: "yt_extract",
            index: x_index,
            size: nx,
        });
    }
    let mut out = Vec::with_capacity(ny * nt);
    for y in 0..ny {
        for t in 0..nt {
            out.push(volume.get(x_index, y, t));
        }
    }
    Ok(out)
}

/// Map nonnegative reals to an 8-bit image by linear scale onto [0, max].
pub fn to_gray(data: &[f64], width: usize, height: usize) -> GrayImage {
    let max = data.iter().cloned().fold(0.0f64, f64::max).max(1e-12);
    GrayImage {
        width,
        height,
        pixels: data.iter().map(|v| (v / max * 255.0).round() as u8).collect(),
    }
}

/// A magnitude frame as an 8-bit image scaled to [0, 1].
pub fn frame_image(volume: &RealVolume, t: usize) -> GrayImage {
    let (nx, ny, _) = volume.dims();
    let mut pixels = Vec::with_capacity(nx * ny);
    for x in 0..nx {
        for y in 0..ny {
            pixels.push((volume.get(x, y, t).clamp(0.0, 1.0) * 255.0).round() as u8);
        }
    }
    GrayImage {
        width: ny,
        height: nx,
        pixels,
    }
}

/// The (ny x nt) line pattern of a sampling mask, sampled = white.
pub fn mask_image(mask: &crate::sampling::SamplingMask) -> GrayImage {
    let (ny, nt) = (mask.ny(), mask.nt());
    let mut pixels = Vec::with_capacity(ny * nt);
    for y in 0..ny {
        for t in 0..nt {
            pixels.push(if mask.is_sampled(y, t) { 255 } else { 0 });
        }
    }
    GrayImage {
        width: nt,
        height: ny,
        pixels,
    }
}

/// Metrics of one reconstruction against its reference.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExampleMetrics {
    pub index: usize,
    pub mse: f64,
    pub psnr: f64,
    pub ssim: f64,
    /// Zero-filled baseline columns.
    pub zf_mse: f64,
    pub zf_psnr: f64,
    pub zf_ssim: f64,
    /// Wall-clock reconstruction time.
    pub recon_seconds: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsReport {
    pub per_example: Vec<ExampleMetrics>,
    pub mean_mse: f64,
    pub mean_psnr: f64,
    pub mean_ssim: f64,
    pub mean_zf_mse: f64,
    pub mean_zf_psnr: f64,
    pub mean_zf_ssim: f64,
}

impl MetricsReport {
    pub fn from_rows(per_example: Vec<ExampleMetrics>) -> Self {
        let n = per_example.len().max(1) as f64;
        let sum = |f: fn(&ExampleMetrics) -> f64| per_example.iter().map(f).sum::<f64>() / n;
        Self {
            mean_mse: sum(|m| m.mse),
            mean_psnr: sum(|m| m.psnr),
            mean_ssim: sum(|m| m.ssim),
            mean_zf_mse: sum(|m| m.zf_mse),
            mean_zf_psnr: sum(|m| m.zf_psnr),
            mean_zf_ssim: sum(|m| m.zf_ssim),
            per_example,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("index,mse,psnr,ssim,zf_mse,zf_psnr,zf_ssim,recon_seconds\n");
        for m in &self.per_example {
            s.push_str(&format!(
                "{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.6}\n",
                m.index, m.mse, m.psnr, m.ssim, m.zf_mse, m.zf_psnr, m.zf_ssim, m.recon_seconds
            ));
        }
        s.push_str(&format!(
            "mean,{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},\n",
            self.mean_mse,
            self.mean_psnr,
            self.mean_ssim,
            self.mean_zf_mse,
            self.mean_zf_psnr,
            self.mean_zf_ssim
        ));
        s
    }
}
