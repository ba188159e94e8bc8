//! Dense real tensors backing the recorded computation graph.

use crate::error::{Error, Result};
use crate::volume::{pack_channels, unpack_channels, ComplexVolume, TwoChannelVolume};

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(shape: &[usize]) -> Self {
        let n = shape.iter().product();
        Self {
            shape: shape.to_vec(),
            data: vec![0.0; n],
        }
    }

    pub fn from_data(shape: &[usize], data: Vec<f64>) -> Result<Self> {
        let n: usize = shape.iter().product();
        if data.len() != n {
            return Err(Error::ShapeMismatch {
                context: "Tensor::from_data",
                expected: format!("{n} elements for shape {shape:?}"),
                got: format!("{}", data.len()),
            });
        }
        Ok(Self {
            shape: shape.to_vec(),
            data,
        })
    }

    pub fn scalar(v: f64) -> Self {
        Self {
            shape: vec![1],
            data: vec![v],
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }
    pub fn numel(&self) -> usize {
        self.data.len()
    }
    pub fn data(&self) -> &[f64] {
        &self.data
    }
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn scalar_value(&self) -> f64 {
        debug_assert_eq!(self.numel(), 1);
        self.data[0]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Elementwise a += b.
    pub fn add_assign(&mut self, other: &Tensor) {
        debug_assert_eq!(self.shape, other.shape);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    /// View a complex volume as its two-channel real tensor in the network's
    /// internal (2, nt, nx, ny) layout. Keeping y innermost gives the conv
    /// kernels long contiguous runs.
    pub fn from_volume(v: &ComplexVolume) -> Self {
        let (nx, ny, nt) = v.dims();
        let n = nx * ny * nt;
        let mut data = vec![0.0; 2 * n];
        for x in 0..nx {
            for y in 0..ny {
                for t in 0..nt {
                    let c = v.get(x, y, t);
                    let i = (t * nx + x) * ny + y;
                    data[i] = c.re;
                    data[n + i] = c.im;
                }
            }
        }
        Self {
            shape: vec![2, nt, nx, ny],
            data,
        }
    }

    /// Interpret a (2, nt, nx, ny) tensor as a complex volume.
    pub fn to_volume(&self) -> ComplexVolume {
        assert_eq!(self.shape.len(), 4, "expected a 4D tensor");
        assert_eq!(self.shape[0], 2, "expected 2 channels");
        let (nt, nx, ny) = (self.shape[1], self.shape[2], self.shape[3]);
        let n = nx * ny * nt;
        let mut vol = ComplexVolume::zeros(nx, ny, nt);
        for t in 0..nt {
            for x in 0..nx {
                for y in 0..ny {
                    let i = (t * nx + x) * ny + y;
                    vol.set(
                        x,
                        y,
                        t,
                        num_complex::Complex64::new(self.data[i], self.data[n + i]),
                    );
                }
            }
        }
        vol
    }

    /// Two-channel I/O view in the (2, nx, ny, nt) boundary layout.
    pub fn from_two_channel(v: &TwoChannelVolume) -> Self {
        Self::from_volume(&unpack_channels(v))
    }

    pub fn to_two_channel(&self) -> TwoChannelVolume {
        pack_channels(&self.to_volume())
    }
}
