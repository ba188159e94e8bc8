//! Complex-valued dynamic volumes and the two-channel real view used at
//! network I/O boundaries.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A (nx, ny, nt) complex-valued dynamic image or k-space array.
/// Samples are stored row-major in (x, y, t) order with t fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVolume {
    nx: usize,
    ny: usize,
    nt: usize,
    data: Vec<Complex64>,
}

impl ComplexVolume {
    pub fn zeros(nx: usize, ny: usize, nt: usize) -> Self {
        assert!(nx >= 1 && ny >= 1 && nt >= 1, "dims must be >= 1");
        Self {
            nx,
            ny,
            nt,
            data: vec![Complex64::new(0.0, 0.0); nx * ny * nt],
        }
    }

    pub fn from_data(nx: usize, ny: usize, nt: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != nx * ny * nt {
            return Err(Error::ShapeMismatch {
                context: "ComplexVolume::from_data",
                expected: format!("{} samples ({}x{}x{})", nx * ny * nt, nx, ny, nt),
                got: format!("{} samples", data.len()),
            });
        }
        Ok(Self { nx, ny, nt, data })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn nt(&self) -> usize {
        self.nt
    }
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.nx, self.ny, self.nt)
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }
    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, t: usize) -> usize {
        debug_assert!(x < self.nx && y < self.ny && t < self.nt);
        (x * self.ny + y) * self.nt + t
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, t: usize) -> Complex64 {
        self.data[self.index(x, y, t)]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, t: usize, v: Complex64) {
        let i = self.index(x, y, t);
        self.data[i] = v;
    }

    /// L2 norm over all samples.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Per-sample modulus sqrt(re^2 + im^2).
    pub fn magnitude(&self) -> RealVolume {
        RealVolume {
            nx: self.nx,
            ny: self.ny,
            nt: self.nt,
            data: self.data.iter().map(|c| c.norm()).collect(),
        }
    }

    /// Max absolute difference between two volumes of equal dims.
    pub fn max_abs_diff(&self, other: &ComplexVolume) -> f64 {
        assert_eq!(self.dims(), other.dims());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Real-valued (nx, ny, nt) volume, same layout as [`ComplexVolume`].
#[derive(Debug, Clone, PartialEq)]
pub struct RealVolume {
    nx: usize,
    ny: usize,
    nt: usize,
    data: Vec<f64>,
}

impl RealVolume {
    pub fn zeros(nx: usize, ny: usize, nt: usize) -> Self {
        Self {
            nx,
            ny,
            nt,
            data: vec![0.0; nx * ny * nt],
        }
    }

    pub fn from_data(nx: usize, ny: usize, nt: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != nx * ny * nt {
            return Err(Error::ShapeMismatch {
                context: "RealVolume::from_data",
                expected: format!("{} samples", nx * ny * nt),
                got: format!("{} samples", data.len()),
            });
        }
        Ok(Self { nx, ny, nt, data })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn nt(&self) -> usize {
        self.nt
    }
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.nx, self.ny, self.nt)
    }
    pub fn data(&self) -> &[f64] {
        &self.data
    }
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, t: usize) -> f64 {
        self.data[(x * self.ny + y) * self.nt + t]
    }

    pub fn max(&self) -> f64 {
        self.data.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// (2, nx, ny, nt) real array; channel 0 holds real parts, channel 1
/// imaginary parts.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoChannelVolume {
    nx: usize,
    ny: usize,
    nt: usize,
    /// channel-major: data[c * nx*ny*nt + (x*ny + y)*nt + t]
    data: Vec<f64>,
}

impl TwoChannelVolume {
    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn from_raw(
        channels: usize,
        nx: usize,
        ny: usize,
        nt: usize,
        data: Vec<f64>,
    ) -> Result<Self> {
        if channels != 2 {
            return Err(Error::ShapeMismatch {
                context: "TwoChannelVolume::from_raw",
                expected: "channel dim must be 2".to_string(),
                got: format!("channel dim {}", channels),
            });
        }
        if data.len() != 2 * nx * ny * nt {
            return Err(Error::ShapeMismatch {
                context: "TwoChannelVolume::from_raw",
                expected: format!("{} reals", 2 * nx * ny * nt),
                got: format!("{} reals", data.len()),
            });
        }
        Ok(Self { nx, ny, nt, data })
    }
}

/// Split a complex volume into its (2, nx, ny, nt) real/imaginary view.
pub fn pack_channels(v: &ComplexVolume) -> TwoChannelVolume {
    let n = v.nx * v.ny * v.nt;
    let mut data = vec![0.0; 2 * n];
    for (i, c) in v.data.iter().enumerate() {
        data[i] = c.re;
        data[n + i] = c.im;
    }
    TwoChannelVolume {
        nx: v.nx,
        ny: v.ny,
        nt: v.nt,
        data,
    }
}

/// Exact inverse of [`pack_channels`].
pub fn unpack_channels(v: &TwoChannelVolume) -> ComplexVolume {
    let n = v.nx * v.ny * v.nt;
    let data = (0..n)
        .map(|i| Complex64::new(v.data[i], v.data[n + i]))
        .collect();
    ComplexVolume {
        nx: v.nx,
        ny: v.ny,
        nt: v.nt,
        data,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    pub fn random_volume(nx: usize, ny: usize, nt: usize, seed: u64) -> ComplexVolume {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let data = (0..nx * ny * nt)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        ComplexVolume::from_data(nx, ny, nt, data).unwrap()
    }

    #[test]
    fn pack_single_sample() {
        let v = ComplexVolume::from_data(1, 1, 1, vec![Complex64::new(3.0, 4.0)]).unwrap();
        let p = pack_channels(&v);
        assert_eq!(p.data(), &[3.0, 4.0]);
        assert_eq!(unpack_channels(&p), v);
    }

    #[test]
    fn pack_round_trip_exact() {
        let v = random_volume(5, 7, 3, 42);
        let back = unpack_channels(&pack_channels(&v));
        assert_eq!(v, back);
    }

    #[test]
    fn unpack_rejects_wrong_channel_dim() {
        let err = TwoChannelVolume::from_raw(3, 2, 2, 2, vec![0.0; 24]).unwrap_err();
        assert!(err.to_string().contains("channel dim must be 2"), "{err}");
    }

    #[test]
    fn magnitude_3_4_is_5() {
        let v = ComplexVolume::from_data(1, 1, 1, vec![Complex64::new(3.0, 4.0)]).unwrap();
        assert_eq!(v.magnitude().data(), &[5.0]);
    }

    #[test]
    fn magnitude_zero_volume() {
        let v = ComplexVolume::zeros(3, 3, 2);
        assert!(v.magnitude().data().iter().all(|&m| m == 0.0));
    }

    #[test]
    fn magnitude_global_phase_invariant() {
        let v = random_volume(6, 5, 2, 7);
        let phase = Complex64::from_polar(1.0, 0.7);
        let rotated = ComplexVolume::from_data(
            v.nx(),
            v.ny(),
            v.nt(),
            v.data().iter().map(|c| c * phase).collect(),
        )
        .unwrap();
        let diff: f64 = v
            .magnitude()
            .data()
            .iter()
            .zip(rotated.magnitude().data())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(diff < 1e-12, "max diff {diff}");
    }
}
