//! Versioned binary checkpoints: model config echo, parameters, optimizer
//! moments and the epoch to resume from, CRC32-protected.

use std::path::Path;

use crate::binio::{read_file, write_file, Decoder, Encoder};
use crate::conv::TemporalPad;
use crate::error::Result;
use crate::model::{ModelConfig, ParameterSet};
use crate::optim::OptimizerState;
use crate::tape::DcWeight;
use crate::tensor::Tensor;

const MAGIC: &[u8; 4] = b"DIMC";
const VERSION: u32 = 1;

#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub config: ModelConfig,
    pub params: ParameterSet,
    pub opt: OptimizerState,
    /// First epoch the resumed run should execute.
    pub next_epoch: u64,
}

fn put_tensor(enc: &mut Encoder, t: &Tensor) {
    enc.put_usize(t.shape().len());
    for &d in t.shape() {
        enc.put_usize(d);
    }
    enc.put_f64_slice(t.data());
}

fn get_tensor(dec: &mut Decoder) -> Result<Tensor> {
    let rank = dec.get_usize()?;
    let mut shape = Vec::with_capacity(rank);
    for _ in 0..rank {
        shape.push(dec.get_usize()?);
    }
    let data = dec.get_f64_vec()?;
    Tensor::from_data(&shape, data)
}

fn put_config(enc: &mut Encoder, c: &ModelConfig) {
    enc.put_usize(c.m_blocks);
    enc.put_usize(c.n_blocks);
    enc.put_usize(c.layers_per_block);
    enc.put_usize(c.filters);
    enc.put_usize(c.kernel.0);
    enc.put_usize(c.kernel.1);
    enc.put_usize(c.kernel.2);
    enc.put_f64(c.dc_lambda.as_f64());
    enc.put_u8(match c.temporal_pad {
        TemporalPad::Zero => 0,
        TemporalPad::Circular => 1,
    });
    enc.put_f64_slice(&c.loss_alpha);
    enc.put_f64_slice(&c.loss_beta);
}

fn get_config(dec: &mut Decoder) -> Result<ModelConfig> {
    Ok(ModelConfig {
        m_blocks: dec.get_usize()?,
        n_blocks: dec.get_usize()?,
        layers_per_block: dec.get_usize()?,
        filters: dec.get_usize()?,
        kernel: (dec.get_usize()?, dec.get_usize()?, dec.get_usize()?),
        dc_lambda: DcWeight::from_f64(dec.get_f64()?),
        temporal_pad: match dec.get_u8()? {
            0 => TemporalPad::Zero,
            _ => TemporalPad::Circular,
        },
        loss_alpha: dec.get_f64_vec()?,
        loss_beta: dec.get_f64_vec()?,
    })
}

pub fn save_checkpoint(path: &Path, cp: &Checkpoint) -> Result<()> {
    let mut enc = Encoder::new();
    put_config(&mut enc, &cp.config);
    enc.put_u64(cp.next_epoch);
    enc.put_u64(cp.opt.step);
    enc.put_f64(cp.opt.beta1);
    enc.put_f64(cp.opt.beta2);
    enc.put_f64(cp.opt.epsilon);
    enc.put_usize(cp.params.len());
    for t in cp.params.tensors() {
        put_tensor(&mut enc, t);
    }
    for t in &cp.opt.m {
        put_tensor(&mut enc, t);
    }
    for t in &cp.opt.v {
        put_tensor(&mut enc, t);
    }
    write_file(path, MAGIC, VERSION, &enc.into_bytes())
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let display = path.display().to_string();
    let payload = read_file(path, MAGIC, VERSION)?;
    let mut dec = Decoder::new(&payload, &display);
    let config = get_config(&mut dec)?;
    config.validate()?;
    let next_epoch = dec.get_u64()?;
    let step = dec.get_u64()?;
    let beta1 = dec.get_f64()?;
    let beta2 = dec.get_f64()?;
    let epsilon = dec.get_f64()?;
    let count = dec.get_usize()?;
    let mut tensors = Vec::with_capacity(count);
    for _ in 0..count {
        tensors.push(get_tensor(&mut dec)?);
    }
    let mut m = Vec::with_capacity(count);
    for _ in 0..count {
        m.push(get_tensor(&mut dec)?);
    }
    let mut v = Vec::with_capacity(count);
    for _ in 0..count {
        v.push(get_tensor(&mut dec)?);
    }
    Ok(Checkpoint {
        config,
        params: ParameterSet::from_tensors(tensors),
        opt: OptimizerState {
            step,
            beta1,
            beta2,
            epsilon,
            m,
            v,
        },
        next_epoch,
    })
}
