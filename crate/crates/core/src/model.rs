//! The cascaded cross-domain forward model: frequency-domain (FDN) blocks
//! with KDC layers, the IFFT bridge, and spatial-domain (SDN) blocks with
//! residual connections and IDC layers. M = 0 yields the D5C5-style
//! image-domain-only cascade where the bridge consumes k_u directly.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

use crate::conv::TemporalPad;
use crate::error::{Error, Result};
use crate::fft::{fft2_frames, ifft2_frames};
use crate::sampling::SamplingMask;
use crate::tape::{kdc_apply, DcWeight, NodeId, Tape};
use crate::tensor::Tensor;
use crate::volume::ComplexVolume;

/// Architecture hyperparameters plus loss weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    /// FDN block count M (0 disables the frequency-domain stage).
    pub m_blocks: usize,
    /// SDN block count N.
    pub n_blocks: usize,
    /// Convolutional layers per block L.
    pub layers_per_block: usize,
    /// Hidden channel width.
    pub filters: usize,
    /// Spatial-temporal kernel extent (x, y, t); dims must be odd.
    pub kernel: (usize, usize, usize),
    /// Data-consistency weight λ shared by KDC and IDC layers.
    pub dc_lambda: DcWeight,
    /// Padding mode along the frame axis (in-plane axes are zero-padded).
    pub temporal_pad: TemporalPad,
    /// k-space loss weights α_1..α_M.
    pub loss_alpha: Vec<f64>,
    /// intermediate-stage spatial loss weights β_1..β_{N-1}.
    pub loss_beta: Vec<f64>,
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_blocks < 1 {
            return Err(Error::Config("n_blocks must be >= 1".into()));
        }
        if self.layers_per_block < 2 {
            return Err(Error::Config("layers_per_block must be >= 2".into()));
        }
        let (kx, ky, kt) = self.kernel;
        if kx % 2 == 0 || ky % 2 == 0 || kt % 2 == 0 {
            return Err(Error::Config(format!(
                "kernel dims must be odd, got {:?}",
                self.kernel
            )));
        }
        self.dc_lambda.validate()?;
        if self.loss_alpha.len() != self.m_blocks {
            return Err(Error::Config(format!(
                "loss_alpha length {} != m_blocks {}",
                self.loss_alpha.len(),
                self.m_blocks
            )));
        }
        if self.loss_beta.len() != self.n_blocks - 1 {
            return Err(Error::Config(format!(
                "loss_beta length {} != n_blocks - 1 = {}",
                self.loss_beta.len(),
                self.n_blocks - 1
            )));
        }
        Ok(())
    }

    pub fn total_blocks(&self) -> usize {
        self.m_blocks + self.n_blocks
    }

    pub fn conv_layer_count(&self) -> usize {
        self.total_blocks() * self.layers_per_block
    }

    /// Channel widths per layer inside one block: 2 -> filters ... -> 2.
    fn layer_channels(&self) -> Vec<(usize, usize)> {
        let l = self.layers_per_block;
        (0..l)
            .map(|i| {
                let cin = if i == 0 { 2 } else { self.filters };
                let cout = if i == l - 1 { 2 } else { self.filters };
                (cin, cout)
            })
            .collect()
    }

    /// Shapes of all (weight, bias) pairs in declaration order:
    /// FDN blocks first, then SDN blocks; layers in forward order.
    pub fn parameter_shapes(&self) -> Vec<(Vec<usize>, Vec<usize>)> {
        let (kx, ky, kt) = self.kernel;
        let per_block: Vec<_> = self
            .layer_channels()
            .into_iter()
            // internal tensor layout is (c, t, x, y), so kernel order is (kt, kx, ky)
            .map(|(cin, cout)| (vec![cout, cin, kt, kx, ky], vec![cout]))
            .collect();
        (0..self.total_blocks())
            .flat_map(|_| per_block.clone())
            .collect()
    }
}

/// All convolution weights and biases, in the declaration order given by
/// [`ModelConfig::parameter_shapes`]. Mutation bumps a generation counter so
/// tapes recorded against older values refuse to run backward.
#[derive(Debug, Clone)]
pub struct ParameterSet {
    tensors: Vec<Tensor>,
    generation: u64,
}

impl ParameterSet {
    /// He initialization: zero-mean Gaussian weights with std sqrt(2/fan_in),
    /// zero biases. Deterministic per seed.
    pub fn he_init(config: &ModelConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut tensors = Vec::new();
        for (wshape, bshape) in config.parameter_shapes() {
            let fan_in: usize = wshape[1..].iter().product();
            let std = (2.0 / fan_in as f64).sqrt();
            let normal = Normal::new(0.0, std).expect("std > 0");
            let n: usize = wshape.iter().product();
            let data: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
            tensors.push(Tensor::from_data(&wshape, data)?);
            tensors.push(Tensor::zeros(&bshape));
        }
        Ok(Self {
            tensors,
            generation: 0,
        })
    }

    pub fn zeros(config: &ModelConfig) -> Result<Self> {
        config.validate()?;
        let tensors = config
            .parameter_shapes()
            .into_iter()
            .flat_map(|(w, b)| [Tensor::zeros(&w), Tensor::zeros(&b)])
            .collect();
        Ok(Self {
            tensors,
            generation: 0,
        })
    }

    pub fn from_tensors(tensors: Vec<Tensor>) -> Self {
        Self {
            tensors,
            generation: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn tensor(&self, i: usize) -> &Tensor {
        &self.tensors[i]
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    /// Mutable access for optimizer updates; invalidates recorded tapes.
    pub fn tensors_mut(&mut self) -> &mut [Tensor] {
        self.generation += 1;
        &mut self.tensors
    }

    pub fn is_finite(&self) -> bool {
        self.tensors.iter().all(Tensor::is_finite)
    }

    /// Tensor indices [start, end) belonging to one block (weights + biases).
    pub fn block_range(config: &ModelConfig, block: usize) -> std::ops::Range<usize> {
        let per_block = 2 * config.layers_per_block;
        block * per_block..(block + 1) * per_block
    }
}

/// Forward results captured for the multi-supervised loss: per-FDN-block DC
/// outputs (k-space), the bridge image, and every SDN stage output.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    pub fdn_dc_outputs: Vec<ComplexVolume>,
    pub bridge_image: ComplexVolume,
    pub sdn_stage_outputs: Vec<ComplexVolume>,
}

/// Tape node ids mirroring [`ForwardTrace`], used to attach losses.
pub struct TraceNodes {
    pub k_u: NodeId,
    pub fdn_dc: Vec<NodeId>,
    pub bridge: NodeId,
    pub sdn: Vec<NodeId>,
}

/// k-space data consistency on complex volumes.
pub fn kdc(
    k_pred: &ComplexVolume,
    k_u: &ComplexVolume,
    mask: &SamplingMask,
    lambda: DcWeight,
) -> Result<ComplexVolume> {
    lambda.validate()?;
    if k_pred.dims() != k_u.dims() {
        return Err(Error::ShapeMismatch {
            context: "kdc",
            expected: format!("{:?}", k_pred.dims()),
            got: format!("{:?}", k_u.dims()),
        });
    }
    let out = kdc_apply(
        &Tensor::from_volume(k_pred),
        &Tensor::from_volume(k_u),
        mask,
        lambda,
    );
    Ok(out.to_volume())
}

/// Image-domain data consistency: FFT, k-space correction, IFFT.
pub fn idc(
    s_pred: &ComplexVolume,
    k_u: &ComplexVolume,
    mask: &SamplingMask,
    lambda: DcWeight,
) -> Result<ComplexVolume> {
    let k = fft2_frames(s_pred);
    Ok(ifft2_frames(&kdc(&k, k_u, mask, lambda)?))
}

/// Records one block's conv/relu stack on the tape. Every layer except the
/// last is followed by ReLU.
fn conv_stack(
    tape: &mut Tape,
    input: NodeId,
    params: &ParameterSet,
    range: std::ops::Range<usize>,
    pad: TemporalPad,
) -> Result<NodeId> {
    let mut cur = input;
    let idx: Vec<usize> = range.collect();
    let layers = idx.len() / 2;
    for l in 0..layers {
        let w = tape.param(params, idx[2 * l]);
        let b = tape.param(params, idx[2 * l + 1]);
        cur = tape.conv3d(cur, w, b, pad)?;
        if l + 1 < layers {
            cur = tape.relu(cur);
        }
    }
    Ok(cur)
}

/// One FDN block on the tape: conv stack on the incoming k-space followed by
/// a KDC layer.
pub fn fdn_block_tape(
    tape: &mut Tape,
    k_in: NodeId,
    k_u: NodeId,
    mask: &Arc<SamplingMask>,
    params: &ParameterSet,
    config: &ModelConfig,
    block: usize,
) -> Result<NodeId> {
    let pred = conv_stack(tape, k_in, params, ParameterSet::block_range(config, block), config.temporal_pad)?;
    tape.kdc(pred, k_u, mask.clone(), config.dc_lambda)
}

/// One SDN block on the tape: conv stack, residual add of the block input,
/// then the IDC projection.
pub fn sdn_block_tape(
    tape: &mut Tape,
    s_in: NodeId,
    k_u: NodeId,
    mask: &Arc<SamplingMask>,
    params: &ParameterSet,
    config: &ModelConfig,
    block: usize,
) -> Result<NodeId> {
    let conv_out = conv_stack(tape, s_in, params, ParameterSet::block_range(config, block), config.temporal_pad)?;
    let residual = tape.add(conv_out, s_in)?;
    let k = tape.fft2(residual);
    let kc = tape.kdc(k, k_u, mask.clone(), config.dc_lambda)?;
    Ok(tape.ifft2(kc))
}

/// Full forward pass recorded on a tape: M FDN blocks, the IFFT bridge,
/// N SDN blocks.
pub fn dimension_forward_tape(
    tape: &mut Tape,
    k_u: &ComplexVolume,
    mask: &Arc<SamplingMask>,
    params: &ParameterSet,
    config: &ModelConfig,
) -> Result<TraceNodes> {
    config.validate()?;
    let expected = 2 * config.conv_layer_count();
    if params.len() != expected {
        return Err(Error::Config(format!(
            "parameter set has {} tensors, config needs {expected}",
            params.len()
        )));
    }
    let (nx, _, _) = k_u.dims();
    if k_u.ny() != mask.ny() || k_u.nt() != mask.nt() {
        return Err(Error::ShapeMismatch {
            context: "dimension_forward",
            expected: format!("mask (ny, nt) = ({}, {})", mask.ny(), mask.nt()),
            got: format!("k_u ({}, {}, {})", nx, k_u.ny(), k_u.nt()),
        });
    }

    let k_u_node = tape.constant(Tensor::from_volume(k_u));
    let mut cur_k = k_u_node;
    let mut fdn_dc = Vec::with_capacity(config.m_blocks);
    for m in 0..config.m_blocks {
        cur_k = fdn_block_tape(tape, cur_k, k_u_node, mask, params, config, m)?;
        fdn_dc.push(cur_k);
    }

    let bridge = tape.ifft2(cur_k);

    let mut cur_s = bridge;
    let mut sdn = Vec::with_capacity(config.n_blocks);
    for n in 0..config.n_blocks {
        cur_s = sdn_block_tape(
            tape,
            cur_s,
            k_u_node,
            mask,
            params,
            config,
            config.m_blocks + n,
        )?;
        sdn.push(cur_s);
    }

    Ok(TraceNodes {
        k_u: k_u_node,
        fdn_dc,
        bridge,
        sdn,
    })
}

/// Convenience inference-only forward pass.
pub fn dimension_forward(
    k_u: &ComplexVolume,
    mask: &Arc<SamplingMask>,
    params: &ParameterSet,
    config: &ModelConfig,
) -> Result<ForwardTrace> {
    let mut tape = Tape::new();
    let nodes = dimension_forward_tape(&mut tape, k_u, mask, params, config)?;
    let trace = ForwardTrace {
        fdn_dc_outputs: nodes
            .fdn_dc
            .iter()
            .map(|&id| tape.value(id).to_volume())
            .collect(),
        bridge_image: tape.value(nodes.bridge).to_volume(),
        sdn_stage_outputs: nodes
            .sdn
            .iter()
            .map(|&id| tape.value(id).to_volume())
            .collect(),
    };
    for (i, v) in trace.sdn_stage_outputs.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("sdn stage {} output", i + 1)));
        }
    }
    Ok(trace)
}

impl ForwardTrace {
    /// The final reconstruction Ŝ_N.
    pub fn reconstruction(&self) -> &ComplexVolume {
        self.sdn_stage_outputs
            .last()
            .expect("n_blocks >= 1 guarantees a final stage")
    }
}

/// Standalone single-block forward passes on complex volumes.
pub fn fdn_block(
    k_in: &ComplexVolume,
    k_u: &ComplexVolume,
    mask: &Arc<SamplingMask>,
    params: &ParameterSet,
    config: &ModelConfig,
    block: usize,
) -> Result<ComplexVolume> {
    let mut tape = Tape::new();
    let k_in_node = tape.constant(Tensor::from_volume(k_in));
    let k_u_node = tape.constant(Tensor::from_volume(k_u));
    let out = fdn_block_tape(&mut tape, k_in_node, k_u_node, mask, params, config, block)?;
    Ok(tape.value(out).to_volume())
}

pub fn sdn_block(
    s_in: &ComplexVolume,
    k_u: &ComplexVolume,
    mask: &Arc<SamplingMask>,
    params: &ParameterSet,
    config: &ModelConfig,
    block: usize,
) -> Result<ComplexVolume> {
    let mut tape = Tape::new();
    let s_in_node = tape.constant(Tensor::from_volume(s_in));
    let k_u_node = tape.constant(Tensor::from_volume(k_u));
    let out = sdn_block_tape(&mut tape, s_in_node, k_u_node, mask, params, config, block)?;
    Ok(tape.value(out).to_volume())
}
