//! Orthonormal per-frame 2D spectral transforms.
//!
//! Forward and inverse are each scaled by 1/sqrt(nx*ny), so both are unitary
//! and each is the adjoint of the other. The DC bin stays at index (0, 0);
//! any fftshift is a presentation concern outside the core.

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::volume::ComplexVolume;

// Plans are cached by (len, direction); rustfft plans are Send + Sync.
static PLAN_CACHE: Mutex<Option<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> = Mutex::new(None);

fn plan(len: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    let mut guard = PLAN_CACHE.lock().unwrap();
    let cache = guard.get_or_insert_with(HashMap::new);
    cache
        .entry((len, forward))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            planner.plan_fft(
                len,
                if forward {
                    FftDirection::Forward
                } else {
                    FftDirection::Inverse
                },
            )
        })
        .clone()
}

fn transform_frames(v: &ComplexVolume, forward: bool) -> ComplexVolume {
    let (nx, ny, nt) = v.dims();
    let row_fft = plan(ny, forward);
    let col_fft = plan(nx, forward);
    let scale = 1.0 / ((nx * ny) as f64).sqrt();

    let mut out = ComplexVolume::zeros(nx, ny, nt);
    let mut frame = vec![Complex64::new(0.0, 0.0); nx * ny];
    let mut col = vec![Complex64::new(0.0, 0.0); nx];

    for t in 0..nt {
        // gather frame t (t is the fastest-varying axis)
        for x in 0..nx {
            for y in 0..ny {
                frame[x * ny + y] = v.get(x, y, t);
            }
        }
        for x in 0..nx {
            row_fft.process(&mut frame[x * ny..(x + 1) * ny]);
        }
        for y in 0..ny {
            for x in 0..nx {
                col[x] = frame[x * ny + y];
            }
            col_fft.process(&mut col);
            for x in 0..nx {
                frame[x * ny + y] = col[x];
            }
        }
        for x in 0..nx {
            for y in 0..ny {
                out.set(x, y, t, frame[x * ny + y] * scale);
            }
        }
    }
    out
}

/// Orthonormal per-frame 2D transform on a two-channel real tensor in the
/// internal (2, nt, nx, ny) layout. Equals [`fft2_frames`]/[`ifft2_frames`]
/// on the complex view; under the unitary scaling each direction is the
/// adjoint of the other, which backward passes rely on.
pub(crate) fn transform_tensor(v: &crate::tensor::Tensor, forward: bool) -> crate::tensor::Tensor {
    let shape = v.shape().to_vec();
    assert_eq!(shape.len(), 4);
    assert_eq!(shape[0], 2);
    let (nt, nx, ny) = (shape[1], shape[2], shape[3]);
    let row_fft = plan(ny, forward);
    let col_fft = plan(nx, forward);
    let scale = 1.0 / ((nx * ny) as f64).sqrt();
    let n = nt * nx * ny;

    let mut out = crate::tensor::Tensor::zeros(&shape);
    let mut frame = vec![Complex64::new(0.0, 0.0); nx * ny];
    let mut col = vec![Complex64::new(0.0, 0.0); nx];
    for t in 0..nt {
        let base = t * nx * ny;
        for i in 0..nx * ny {
            frame[i] = Complex64::new(v.data()[base + i], v.data()[n + base + i]);
        }
        for x in 0..nx {
            row_fft.process(&mut frame[x * ny..(x + 1) * ny]);
        }
        for y in 0..ny {
            for x in 0..nx {
                col[x] = frame[x * ny + y];
            }
            col_fft.process(&mut col);
            for x in 0..nx {
                frame[x * ny + y] = col[x];
            }
        }
        let data = out.data_mut();
        for i in 0..nx * ny {
            data[base + i] = frame[i].re * scale;
            data[n + base + i] = frame[i].im * scale;
        }
    }
    out
}

/// Independent orthonormal 2D DFT over (x, y) for every frame t.
pub fn fft2_frames(v: &ComplexVolume) -> ComplexVolume {
    transform_frames(v, true)
}

/// Exact inverse of [`fft2_frames`] under the orthonormal scaling.
pub fn ifft2_frames(v: &ComplexVolume) -> ComplexVolume {
    transform_frames(v, false)
}
