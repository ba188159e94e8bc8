//! Retrospective Cartesian undersampling: variable-density phase-encode mask
//! generation, measurement masking, zero-filled reconstruction.
//!
//! Masks sample whole phase-encode lines: a sampled ky line means every kx
//! along it is acquired in that frame. Line selection is weighted by a
//! zero-mean Gaussian density over the centered line offset, the central ACS
//! lines are always kept, and every frame gets exactly round(ny/accel) lines.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::fft::ifft2_frames;
use crate::volume::ComplexVolume;

/// Per-frame boolean phase-encode line pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingMask {
    ny: usize,
    nt: usize,
    /// (ny x nt) matrix, index `y * nt + t`; true = line sampled.
    lines: Vec<bool>,
    acs: usize,
    accel: f64,
}

impl SamplingMask {
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn nt(&self) -> usize {
        self.nt
    }
    pub fn acs(&self) -> usize {
        self.acs
    }
    pub fn accel(&self) -> f64 {
        self.accel
    }
    pub fn lines(&self) -> &[bool] {
        &self.lines
    }

    #[inline]
    pub fn is_sampled(&self, y: usize, t: usize) -> bool {
        self.lines[y * self.nt + t]
    }

    pub fn sampled_count(&self, t: usize) -> usize {
        (0..self.ny).filter(|&y| self.is_sampled(y, t)).count()
    }

    /// Rebuild a mask from stored parts (dataset/checkpoint deserialization).
    pub fn from_parts(
        ny: usize,
        nt: usize,
        lines: Vec<bool>,
        acs: usize,
        accel: f64,
    ) -> Result<Self> {
        if lines.len() != ny * nt {
            return Err(Error::ShapeMismatch {
                context: "SamplingMask::from_parts",
                expected: format!("{} line flags", ny * nt),
                got: format!("{}", lines.len()),
            });
        }
        Ok(Self {
            ny,
            nt,
            lines,
            acs,
            accel,
        })
    }

    /// A mask with every line sampled in every frame.
    pub fn full(ny: usize, nt: usize) -> Self {
        Self {
            ny,
            nt,
            lines: vec![true; ny * nt],
            acs: ny,
            accel: 1.0,
        }
    }

    /// Index range of the centered ACS lines.
    pub fn acs_range(ny: usize, acs: usize) -> std::ops::Range<usize> {
        let start = ny / 2 - acs / 2;
        start..start + acs
    }
}

/// Lines acquired per frame at the given acceleration.
pub fn line_budget(ny: usize, accel: f64) -> usize {
    (ny as f64 / accel).round() as usize
}

/// Variable-density Cartesian mask. Per frame: the `acs` central lines plus
/// Gaussian-weighted lines drawn without replacement up to exactly
/// round(ny/accel) in total. Deterministic per seed; frames independent.
///
/// `sigma` is the Gaussian density width; `None` uses the default ny/6.
pub fn generate_mask_with_sigma(
    ny: usize,
    nt: usize,
    accel: f64,
    acs: usize,
    sigma: Option<f64>,
    seed: u64,
) -> Result<SamplingMask> {
    if accel < 1.0 {
        return Err(Error::Config(format!(
            "acceleration factor must be >= 1, got {accel}"
        )));
    }
    let budget = line_budget(ny, accel);
    if acs > budget {
        return Err(Error::Config(format!(
            "ACS exceeds line budget: acs={acs}, budget={budget} (ny={ny}, accel={accel})"
        )));
    }
    if budget > ny {
        return Err(Error::Config(format!(
            "line budget {budget} exceeds ny={ny}"
        )));
    }
    let sigma = sigma.unwrap_or(ny as f64 / 6.0);
    if sigma <= 0.0 {
        return Err(Error::Config(format!("sigma must be positive, got {sigma}")));
    }

    let center = (ny as f64 - 1.0) / 2.0;
    let acs_range = SamplingMask::acs_range(ny, acs);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut lines = vec![false; ny * nt];

    for t in 0..nt {
        for y in acs_range.clone() {
            lines[y * nt + t] = true;
        }
        // Gaussian weights over the not-yet-sampled lines
        let mut weights: Vec<f64> = (0..ny)
            .map(|y| {
                if lines[y * nt + t] {
                    0.0
                } else {
                    let off = y as f64 - center;
                    (-off * off / (2.0 * sigma * sigma)).exp()
                }
            })
            .collect();
        for _ in acs..budget {
            let total: f64 = weights.iter().sum();
            debug_assert!(total > 0.0);
            let mut u = rng.gen::<f64>() * total;
            let mut chosen = ny - 1;
            for (y, w) in weights.iter().enumerate() {
                u -= w;
                if u <= 0.0 && *w > 0.0 {
                    chosen = y;
                    break;
                }
            }
            // fall back to the last nonzero weight if rounding pushed past the end
            if weights[chosen] == 0.0 {
                chosen = weights
                    .iter()
                    .rposition(|&w| w > 0.0)
                    .expect("budget <= ny guarantees a free line");
            }
            lines[chosen * nt + t] = true;
            weights[chosen] = 0.0;
        }
    }

    Ok(SamplingMask {
        ny,
        nt,
        lines,
        acs,
        accel,
    })
}

pub fn generate_mask(ny: usize, nt: usize, accel: f64, acs: usize, seed: u64) -> Result<SamplingMask> {
    generate_mask_with_sigma(ny, nt, accel, acs, None, seed)
}

/// Keep sampled k-space positions, zero the rest (the masking half of the
/// undersampled acquisition operator).
pub fn apply_mask(k: &ComplexVolume, m: &SamplingMask) -> Result<ComplexVolume> {
    let (nx, ny, nt) = k.dims();
    if ny != m.ny() || nt != m.nt() {
        return Err(Error::ShapeMismatch {
            context: "apply_mask",
            expected: format!("(ny, nt) = ({}, {})", m.ny(), m.nt()),
            got: format!("(ny, nt) = ({}, {})", ny, nt),
        });
    }
    let mut out = ComplexVolume::zeros(nx, ny, nt);
    for x in 0..nx {
        for y in 0..ny {
            for t in 0..nt {
                if m.is_sampled(y, t) {
                    out.set(x, y, t, k.get(x, y, t));
                }
            }
        }
    }
    Ok(out)
}

/// Inverse transform of zero-filled k-space: the aliased baseline.
pub fn zero_filled_recon(k_u: &ComplexVolume) -> ComplexVolume {
    ifft2_frames(k_u)
}
