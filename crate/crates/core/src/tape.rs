//! Recorded forward computation over a fixed operator set, with reverse-mode
//! gradient evaluation.
//!
//! The tape is append-only, so node order is already topological; backward
//! walks it in reverse and accumulates gradients additively over fan-out.
//! FFT/IFFT backward uses the adjoint, which under the orthonormal scaling is
//! the opposite-direction transform on the two-channel real view.

use std::sync::Arc;

use crate::conv::{conv3d_backward, conv3d_forward, TemporalPad};
use crate::error::{Error, Result};
use crate::fft::transform_tensor;
use crate::model::ParameterSet;
use crate::sampling::SamplingMask;
use crate::tensor::Tensor;

pub type NodeId = usize;

/// Data-consistency blend weight λ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DcWeight {
    /// Hard replacement: sampled positions take the measured value exactly.
    Infinite,
    /// Soft blend (pred + λ·meas) / (1 + λ).
    Finite(f64),
}

impl DcWeight {
    pub fn validate(&self) -> Result<()> {
        match self {
            DcWeight::Infinite => Ok(()),
            DcWeight::Finite(l) if *l > 0.0 && l.is_finite() => Ok(()),
            DcWeight::Finite(l) => Err(Error::Config(format!(
                "data-consistency lambda must be positive, got {l}"
            ))),
        }
    }

    /// Blend factor applied to the prediction at sampled positions.
    pub fn pred_factor(&self) -> f64 {
        match self {
            DcWeight::Infinite => 0.0,
            DcWeight::Finite(l) => 1.0 / (1.0 + l),
        }
    }

    /// Blend factor applied to the measurement at sampled positions.
    pub fn meas_factor(&self) -> f64 {
        match self {
            DcWeight::Infinite => 1.0,
            DcWeight::Finite(l) => l / (1.0 + l),
        }
    }

    pub fn as_f64(&self) -> f64 {
        match self {
            DcWeight::Infinite => f64::INFINITY,
            DcWeight::Finite(l) => *l,
        }
    }

    pub fn from_f64(v: f64) -> Self {
        if v.is_infinite() {
            DcWeight::Infinite
        } else {
            DcWeight::Finite(v)
        }
    }
}

enum Op {
    Constant,
    Param { index: usize },
    Conv3d { input: NodeId, weight: NodeId, bias: NodeId, pad: TemporalPad },
    Relu { input: NodeId },
    Add { a: NodeId, b: NodeId },
    Fft2 { input: NodeId },
    Ifft2 { input: NodeId },
    Kdc { pred: NodeId, mask: Arc<SamplingMask>, lambda: DcWeight },
    /// sum((a - target)^2); target takes no gradient.
    SqDiffSum { a: NodeId, target: NodeId },
    WeightedSum { terms: Vec<(f64, NodeId)> },
}

pub struct Tape {
    nodes: Vec<(Op, Tensor)>,
    params_generation: Option<u64>,
}

impl Default for Tape {
    fn default() -> Self {
        Self::new()
    }
}

impl Tape {
    pub fn new() -> Self {
        Self {
            nodes: Vec::new(),
            params_generation: None,
        }
    }

    pub fn value(&self, id: NodeId) -> &Tensor {
        &self.nodes[id].1
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, op: Op, value: Tensor) -> NodeId {
        self.nodes.push((op, value));
        self.nodes.len() - 1
    }

    pub fn constant(&mut self, value: Tensor) -> NodeId {
        self.push(Op::Constant, value)
    }

    /// Register a trainable parameter leaf. `index` addresses the tensor
    /// inside the [`ParameterSet`] the gradients are collected for.
    pub fn param(&mut self, params: &ParameterSet, index: usize) -> NodeId {
        match self.params_generation {
            None => self.params_generation = Some(params.generation()),
            Some(g) => debug_assert_eq!(g, params.generation(), "mixed parameter generations"),
        }
        self.push(Op::Param { index }, params.tensor(index).clone())
    }

    pub fn conv3d(
        &mut self,
        input: NodeId,
        weight: NodeId,
        bias: NodeId,
        pad: TemporalPad,
    ) -> Result<NodeId> {
        let out = conv3d_forward(self.value(input), self.value(weight), self.value(bias), pad)?;
        Ok(self.push(Op::Conv3d { input, weight, bias, pad }, out))
    }

    pub fn relu(&mut self, input: NodeId) -> NodeId {
        let mut out = self.value(input).clone();
        for v in out.data_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        self.push(Op::Relu { input }, out)
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        if self.value(a).shape() != self.value(b).shape() {
            return Err(Error::ShapeMismatch {
                context: "tape add",
                expected: format!("{:?}", self.value(a).shape()),
                got: format!("{:?}", self.value(b).shape()),
            });
        }
        let mut out = self.value(a).clone();
        out.add_assign(self.value(b));
        Ok(self.push(Op::Add { a, b }, out))
    }

    pub fn fft2(&mut self, input: NodeId) -> NodeId {
        let out = transform_tensor(self.value(input), true);
        self.push(Op::Fft2 { input }, out)
    }

    pub fn ifft2(&mut self, input: NodeId) -> NodeId {
        let out = transform_tensor(self.value(input), false);
        self.push(Op::Ifft2 { input }, out)
    }

    /// K-space data consistency: blend prediction with the measured k-space
    /// at sampled positions, pass the prediction through elsewhere.
    /// `measured` must be a constant (or otherwise gradient-free) node.
    pub fn kdc(
        &mut self,
        pred: NodeId,
        measured: NodeId,
        mask: Arc<SamplingMask>,
        lambda: DcWeight,
    ) -> Result<NodeId> {
        lambda.validate()?;
        let p = self.value(pred);
        let m = self.value(measured);
        if p.shape() != m.shape() {
            return Err(Error::ShapeMismatch {
                context: "kdc",
                expected: format!("{:?}", p.shape()),
                got: format!("{:?}", m.shape()),
            });
        }
        let out = kdc_apply(p, m, &mask, lambda);
        Ok(self.push(Op::Kdc { pred, mask, lambda }, out))
    }

    /// Scalar node: sum of squared differences against a reference node.
    pub fn sq_diff_sum(&mut self, a: NodeId, target: NodeId) -> Result<NodeId> {
        if self.value(a).shape() != self.value(target).shape() {
            return Err(Error::ShapeMismatch {
                context: "sq_diff_sum",
                expected: format!("{:?}", self.value(a).shape()),
                got: format!("{:?}", self.value(target).shape()),
            });
        }
        // compensated summation: finite-difference gradient checks divide
        // tiny loss differences by h, so loss roundoff must stay near eps*|s|
        let mut s = 0.0f64;
        let mut c = 0.0f64;
        for (x, y) in self.value(a).data().iter().zip(self.value(target).data()) {
            let term = (x - y) * (x - y) - c;
            let t = s + term;
            c = (t - s) - term;
            s = t;
        }
        Ok(self.push(Op::SqDiffSum { a, target }, Tensor::scalar(s)))
    }

    /// Scalar node: sum of weight * scalar-node terms.
    pub fn weighted_sum(&mut self, terms: Vec<(f64, NodeId)>) -> NodeId {
        let s: f64 = terms
            .iter()
            .map(|(w, id)| w * self.value(*id).scalar_value())
            .sum();
        self.push(Op::WeightedSum { terms }, Tensor::scalar(s))
    }

    /// Reverse pass from a scalar root. Returns gradients for the parameter
    /// set the tape was built against, shaped like its tensors.
    pub fn backward(&self, root: NodeId, params: &ParameterSet) -> Result<Vec<Tensor>> {
        if let Some(g) = self.params_generation {
            if g != params.generation() {
                return Err(Error::StaleTape);
            }
        }
        if self.value(root).numel() != 1 {
            return Err(Error::Config("backward root must be a scalar node".into()));
        }

        let mut grads: Vec<Option<Tensor>> = vec![None; self.nodes.len()];
        grads[root] = Some(Tensor::scalar(1.0));

        for id in (0..self.nodes.len()).rev() {
            let g = match grads[id].take() {
                Some(g) => g,
                None => continue,
            };
            match &self.nodes[id].0 {
                Op::Constant | Op::Param { .. } => {
                    grads[id] = Some(g); // keep leaf gradients
                }
                Op::Conv3d { input, weight, bias, pad } => {
                    let (gi, gw, gb) = conv3d_backward(
                        self.value(*input),
                        self.value(*weight),
                        self.value(*bias),
                        &g,
                        *pad,
                    )?;
                    accumulate(&mut grads[*input], gi);
                    accumulate(&mut grads[*weight], gw);
                    accumulate(&mut grads[*bias], gb);
                }
                Op::Relu { input } => {
                    let mut gi = g;
                    for (gv, &x) in gi.data_mut().iter_mut().zip(self.value(*input).data()) {
                        if x <= 0.0 {
                            *gv = 0.0;
                        }
                    }
                    accumulate(&mut grads[*input], gi);
                }
                Op::Add { a, b } => {
                    accumulate(&mut grads[*a], g.clone());
                    accumulate(&mut grads[*b], g);
                }
                Op::Fft2 { input } => {
                    accumulate(&mut grads[*input], transform_tensor(&g, false));
                }
                Op::Ifft2 { input } => {
                    accumulate(&mut grads[*input], transform_tensor(&g, true));
                }
                Op::Kdc { pred, mask, lambda } => {
                    let mut gp = g;
                    scale_sampled(&mut gp, mask, lambda.pred_factor());
                    accumulate(&mut grads[*pred], gp);
                }
                Op::SqDiffSum { a, target } => {
                    let gs = g.scalar_value();
                    let mut ga = self.value(*a).clone();
                    for (v, &t) in ga.data_mut().iter_mut().zip(self.value(*target).data()) {
                        *v = 2.0 * (*v - t) * gs;
                    }
                    accumulate(&mut grads[*a], ga);
                }
                Op::WeightedSum { terms } => {
                    let gs = g.scalar_value();
                    for (w, term) in terms {
                        accumulate(&mut grads[*term], Tensor::scalar(w * gs));
                    }
                }
            }
        }

        let mut out: Vec<Tensor> = (0..params.len())
            .map(|i| Tensor::zeros(params.tensor(i).shape()))
            .collect();
        for (id, (op, _)) in self.nodes.iter().enumerate() {
            if let Op::Param { index } = op {
                if let Some(g) = &grads[id] {
                    out[*index].add_assign(g);
                }
            }
        }
        Ok(out)
    }
}

fn accumulate(slot: &mut Option<Tensor>, g: Tensor) {
    match slot {
        Some(acc) => acc.add_assign(&g),
        None => *slot = Some(g),
    }
}

/// DC blend on a (2, nt, nx, ny) tensor.
pub(crate) fn kdc_apply(
    pred: &Tensor,
    measured: &Tensor,
    mask: &SamplingMask,
    lambda: DcWeight,
) -> Tensor {
    let shape = pred.shape();
    let (nt, nx, ny) = (shape[1], shape[2], shape[3]);
    let n = nt * nx * ny;
    let pf = lambda.pred_factor();
    let mf = lambda.meas_factor();
    let mut out = pred.clone();
    {
        let data = out.data_mut();
        for t in 0..nt {
            for y in 0..ny {
                if !mask.is_sampled(y, t) {
                    continue;
                }
                for x in 0..nx {
                    let i = (t * nx + x) * ny + y;
                    data[i] = pf * pred.data()[i] + mf * measured.data()[i];
                    data[n + i] = pf * pred.data()[n + i] + mf * measured.data()[n + i];
                }
            }
        }
    }
    out
}

/// Multiply sampled positions of a (2, nt, nx, ny) tensor by `factor`.
fn scale_sampled(t4: &mut Tensor, mask: &SamplingMask, factor: f64) {
    let shape = t4.shape().to_vec();
    let (nt, nx, ny) = (shape[1], shape[2], shape[3]);
    let n = nt * nx * ny;
    let data = t4.data_mut();
    for t in 0..nt {
        for y in 0..ny {
            if !mask.is_sampled(y, t) {
                continue;
            }
            for x in 0..nx {
                let i = (t * nx + x) * ny + y;
                data[i] *= factor;
                data[n + i] *= factor;
            }
        }
    }
}
