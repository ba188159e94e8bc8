//! The multi-supervised training loss: primary loss on the final
//! reconstruction, weighted k-space losses on the FDN DC outputs, and
//! weighted spatial losses on the intermediate SDN stages.
//!
//! All terms are sums of squared differences over the two-channel real view
//! (the literal squared L2 norm of the complex residual).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ForwardTrace, ModelConfig, TraceNodes};
use crate::tape::{NodeId, Tape};
use crate::tensor::Tensor;
use crate::volume::ComplexVolume;

/// Per-batch loss decomposition. `tloss` always equals
/// `ploss + Σ α_m·kloss_m + Σ β_n·sloss_n`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LossReport {
    pub ploss: f64,
    pub kloss_terms: Vec<f64>,
    pub sloss_terms: Vec<f64>,
    pub tloss: f64,
}

impl LossReport {
    /// Recomputed decomposition residual, relative to tloss.
    pub fn decomposition_error(&self, alpha: &[f64], beta: &[f64]) -> f64 {
        let recomputed = self.ploss
            + self
                .kloss_terms
                .iter()
                .zip(alpha)
                .map(|(k, a)| a * k)
                .sum::<f64>()
            + self
                .sloss_terms
                .iter()
                .zip(beta)
                .map(|(s, b)| b * s)
                .sum::<f64>();
        (self.tloss - recomputed).abs() / self.tloss.abs().max(1e-12)
    }
}

/// Sum of squared elementwise differences over the two-channel real view.
pub fn mse(a: &ComplexVolume, b: &ComplexVolume) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(Error::ShapeMismatch {
            context: "mse",
            expected: format!("{:?}", a.dims()),
            got: format!("{:?}", b.dims()),
        });
    }
    Ok(a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| {
            let d = x - y;
            d.re * d.re + d.im * d.im
        })
        .sum())
}

/// Weighted sum of k-space errors of each FDN DC output against the fully
/// sampled k-space.
pub fn kspace_loss(trace: &ForwardTrace, k_f: &ComplexVolume, alpha: &[f64]) -> Result<f64> {
    if alpha.len() != trace.fdn_dc_outputs.len() {
        return Err(Error::Config(format!(
            "alpha has {} weights for {} FDN outputs",
            alpha.len(),
            trace.fdn_dc_outputs.len()
        )));
    }
    let mut total = 0.0;
    for (a, k) in alpha.iter().zip(&trace.fdn_dc_outputs) {
        total += a * mse(k_f, k)?;
    }
    Ok(total)
}

/// Weighted sum of image errors of the INTERMEDIATE SDN stages 1..N-1; the
/// final stage is covered by the primary loss.
pub fn spatial_loss(trace: &ForwardTrace, s_ref: &ComplexVolume, beta: &[f64]) -> Result<f64> {
    let n = trace.sdn_stage_outputs.len();
    if beta.len() != n - 1 {
        return Err(Error::Config(format!(
            "beta has {} weights for {} intermediate stages",
            beta.len(),
            n - 1
        )));
    }
    let mut total = 0.0;
    for (b, s) in beta.iter().zip(&trace.sdn_stage_outputs[..n - 1]) {
        total += b * mse(s_ref, s)?;
    }
    Ok(total)
}

/// Full multi-supervised loss decomposition for a forward trace.
pub fn total_loss(
    trace: &ForwardTrace,
    s_ref: &ComplexVolume,
    k_f: &ComplexVolume,
    config: &ModelConfig,
) -> Result<LossReport> {
    let ploss = mse(s_ref, trace.reconstruction())?;
    let kloss_terms: Vec<f64> = trace
        .fdn_dc_outputs
        .iter()
        .map(|k| mse(k_f, k))
        .collect::<Result<_>>()?;
    let n = trace.sdn_stage_outputs.len();
    let sloss_terms: Vec<f64> = trace.sdn_stage_outputs[..n - 1]
        .iter()
        .map(|s| mse(s_ref, s))
        .collect::<Result<_>>()?;
    if kloss_terms.len() != config.loss_alpha.len() || sloss_terms.len() != config.loss_beta.len()
    {
        return Err(Error::Config(
            "loss weight counts do not match the trace".into(),
        ));
    }
    let tloss = ploss
        + config
            .loss_alpha
            .iter()
            .zip(&kloss_terms)
            .map(|(a, k)| a * k)
            .sum::<f64>()
        + config
            .loss_beta
            .iter()
            .zip(&sloss_terms)
            .map(|(b, s)| b * s)
            .sum::<f64>();
    Ok(LossReport {
        ploss,
        kloss_terms,
        sloss_terms,
        tloss,
    })
}

/// Scalar loss nodes attached to a recorded forward pass.
pub struct LossNodes {
    pub ploss: NodeId,
    pub kloss: Vec<NodeId>,
    pub sloss: Vec<NodeId>,
    pub tloss: NodeId,
}

/// Attach the multi-supervised loss to a recorded forward pass. Returns the
/// scalar tloss root for backward plus the individual term nodes.
pub fn attach_loss(
    tape: &mut Tape,
    nodes: &TraceNodes,
    s_ref: &ComplexVolume,
    k_f: &ComplexVolume,
    config: &ModelConfig,
) -> Result<LossNodes> {
    let s_ref_node = tape.constant(Tensor::from_volume(s_ref));
    let k_f_node = tape.constant(Tensor::from_volume(k_f));

    let final_stage = *nodes.sdn.last().expect("n_blocks >= 1");
    let ploss = tape.sq_diff_sum(final_stage, s_ref_node)?;

    let mut kloss = Vec::with_capacity(nodes.fdn_dc.len());
    for &dc in &nodes.fdn_dc {
        kloss.push(tape.sq_diff_sum(dc, k_f_node)?);
    }
    let mut sloss = Vec::with_capacity(nodes.sdn.len() - 1);
    for &stage in &nodes.sdn[..nodes.sdn.len() - 1] {
        sloss.push(tape.sq_diff_sum(stage, s_ref_node)?);
    }

    let mut terms = vec![(1.0, ploss)];
    terms.extend(config.loss_alpha.iter().copied().zip(kloss.iter().copied()));
    terms.extend(config.loss_beta.iter().copied().zip(sloss.iter().copied()));
    let tloss = tape.weighted_sum(terms);

    Ok(LossNodes {
        ploss,
        kloss,
        sloss,
        tloss,
    })
}

impl LossNodes {
    pub fn report(&self, tape: &Tape) -> LossReport {
        LossReport {
            ploss: tape.value(self.ploss).scalar_value(),
            kloss_terms: self.kloss.iter().map(|&n| tape.value(n).scalar_value()).collect(),
            sloss_terms: self.sloss.iter().map(|&n| tape.value(n).scalar_value()).collect(),
            tloss: tape.value(self.tloss).scalar_value(),
        }
    }
}
