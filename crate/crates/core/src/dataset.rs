//! Training/test datasets of (fully sampled image, undersampled k-space,
//! mask) triples, with deterministic synthetic generation and a CRC-checked
//! binary file format.

use std::path::Path;

use num_complex::Complex64;

use crate::binio::{read_file, write_file, Decoder, Encoder};
use crate::error::{Error, Result};
use crate::phantom::{generate_phantom, simulate_acquisition, PhantomSpec};
use crate::sampling::{generate_mask_with_sigma, SamplingMask};
use crate::volume::ComplexVolume;

const MAGIC: &[u8; 4] = b"DIMK";
const VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub s: ComplexVolume,
    pub k_u: ComplexVolume,
    pub mask: SamplingMask,
    pub split: Split,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub examples: Vec<Example>,
}

/// Everything needed to synthesize a dataset deterministically.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    pub phantom: PhantomSpec,
    pub count: usize,
    /// Fraction of examples tagged Train (rest Test).
    pub train_frac: f64,
    pub accel: f64,
    pub acs: usize,
    pub mask_sigma: Option<f64>,
    /// Fresh mask per example when true; one shared mask otherwise.
    pub fresh_mask_per_example: bool,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        Self {
            phantom: PhantomSpec::default(),
            count: 50,
            train_frac: 0.9,
            accel: 4.0,
            acs: 4,
            mask_sigma: None,
            fresh_mask_per_example: true,
        }
    }
}

impl Dataset {
    /// Deterministic synthesis: example i uses phantom seed base+i, mask seed
    /// derived from the same base. The first round(count*train_frac) examples
    /// are the training split.
    pub fn generate(spec: &DatasetSpec) -> Result<Self> {
        let n_train = (spec.count as f64 * spec.train_frac).round() as usize;
        let mut examples = Vec::with_capacity(spec.count);
        let shared_mask = if spec.fresh_mask_per_example {
            None
        } else {
            Some(generate_mask_with_sigma(
                spec.phantom.ny,
                spec.phantom.nt,
                spec.accel,
                spec.acs,
                spec.mask_sigma,
                spec.phantom.seed ^ 0x6d61736b, // "mask"
            )?)
        };
        for i in 0..spec.count {
            let mut pspec = spec.phantom.clone();
            pspec.seed = spec.phantom.seed.wrapping_add(i as u64);
            let s = generate_phantom(&pspec)?;
            let mask = match &shared_mask {
                Some(m) => m.clone(),
                None => generate_mask_with_sigma(
                    pspec.ny,
                    pspec.nt,
                    spec.accel,
                    spec.acs,
                    spec.mask_sigma,
                    pspec.seed ^ 0x6d61736b,
                )?,
            };
            let k_u = simulate_acquisition(&s, &mask, pspec.noise_std, pspec.seed ^ 0x6e6f6973)?;
            examples.push(Example {
                s,
                k_u,
                mask,
                split: if i < n_train { Split::Train } else { Split::Test },
            });
        }
        Ok(Self { examples })
    }

    pub fn split(&self, split: Split) -> Vec<&Example> {
        self.examples.iter().filter(|e| e.split == split).collect()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut enc = Encoder::new();
        enc.put_usize(self.examples.len());
        for ex in &self.examples {
            let mut rec = Encoder::new();
            rec.put_u8(match ex.split {
                Split::Train => 0,
                Split::Test => 1,
            });
            let (nx, ny, nt) = ex.s.dims();
            rec.put_usize(nx);
            rec.put_usize(ny);
            rec.put_usize(nt);
            rec.put_usize(ex.mask.acs());
            rec.put_f64(ex.mask.accel());
            rec.put_bools(ex.mask.lines());
            put_volume(&mut rec, &ex.s);
            put_volume(&mut rec, &ex.k_u);
            let bytes = rec.into_bytes();
            enc.put_usize(bytes.len());
            enc.put_bytes(&bytes);
            enc.put_u32(crc32fast::hash(&bytes));
        }
        write_file(path, MAGIC, VERSION, &enc.into_bytes())
    }

    /// Load and re-validate the triple consistency invariant: unsampled
    /// positions of K_u must be exactly zero and all samples finite.
    pub fn load(path: &Path) -> Result<Self> {
        let display = path.display().to_string();
        let payload = read_file(path, MAGIC, VERSION)?;
        let mut dec = Decoder::new(&payload, &display);
        let count = dec.get_usize()?;
        let mut examples = Vec::with_capacity(count);
        for rec_idx in 0..count {
            let len = dec.get_usize()?;
            let rec_bytes = dec.take_slice(len)?;
            let stored_crc = dec.get_u32()?;
            let crc = crc32fast::hash(rec_bytes);
            if crc != stored_crc {
                return Err(Error::Format {
                    path: display,
                    reason: format!("record {rec_idx}: CRC mismatch"),
                });
            }
            let mut r = Decoder::new(rec_bytes, &display);
            let split = match r.get_u8()? {
                0 => Split::Train,
                1 => Split::Test,
                other => {
                    return Err(Error::Format {
                        path: display,
                        reason: format!("record {rec_idx}: unknown split tag {other}"),
                    })
                }
            };
            let nx = r.get_usize()?;
            let ny = r.get_usize()?;
            let nt = r.get_usize()?;
            let acs = r.get_usize()?;
            let accel = r.get_f64()?;
            let lines = r.get_bools()?;
            let mask = SamplingMask::from_parts(ny, nt, lines, acs, accel)?;
            let s = get_volume(&mut r, nx, ny, nt)?;
            let k_u = get_volume(&mut r, nx, ny, nt)?;
            if !s.is_finite() || !k_u.is_finite() {
                return Err(Error::NonFinite(format!("dataset record {rec_idx}")));
            }
            for y in 0..ny {
                for t in 0..nt {
                    if mask.is_sampled(y, t) {
                        continue;
                    }
                    for x in 0..nx {
                        if k_u.get(x, y, t) != Complex64::new(0.0, 0.0) {
                            return Err(Error::Format {
                                path: display,
                                reason: format!(
                                    "record {rec_idx}: nonzero k-space at unsampled line (y={y}, t={t})"
                                ),
                            });
                        }
                    }
                }
            }
            examples.push(Example { s, k_u, mask, split });
        }
        Ok(Self { examples })
    }
}

fn put_volume(enc: &mut Encoder, v: &ComplexVolume) {
    for c in v.data() {
        enc.put_f64(c.re);
        enc.put_f64(c.im);
    }
}

fn get_volume(dec: &mut Decoder, nx: usize, ny: usize, nt: usize) -> Result<ComplexVolume> {
    let n = nx * ny * nt;
    let mut data = Vec::with_capacity(n);
    for _ in 0..n {
        let re = dec.get_f64()?;
        let im = dec.get_f64()?;
        data.push(Complex64::new(re, im));
    }
    ComplexVolume::from_data(nx, ny, nt, data)
}
