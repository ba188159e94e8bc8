//! Adam with bias correction and an exponential per-epoch learning-rate
//! schedule.

use crate::error::{Error, Result};
use crate::model::ParameterSet;
use crate::tensor::Tensor;

#[derive(Debug, Clone)]
pub struct OptimizerState {
    pub step: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// First and second moments, shaped like the parameter set.
    pub m: Vec<Tensor>,
    pub v: Vec<Tensor>,
}

impl OptimizerState {
    pub fn new(params: &ParameterSet) -> Self {
        let zeros: Vec<Tensor> = params
            .tensors()
            .iter()
            .map(|t| Tensor::zeros(t.shape()))
            .collect();
        Self {
            step: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            m: zeros.clone(),
            v: zeros,
        }
    }
}

/// lr = lr0 * decay^epoch.
pub fn lr_schedule(lr0: f64, decay: f64, epoch: u64) -> f64 {
    lr0 * decay.powi(epoch as i32)
}

/// One bias-corrected Adam update at the given learning rate.
pub fn adam_step(
    state: &mut OptimizerState,
    params: &mut ParameterSet,
    grads: &[Tensor],
    lr: f64,
) -> Result<()> {
    if grads.len() != params.len() {
        return Err(Error::ShapeMismatch {
            context: "adam_step",
            expected: format!("{} gradient tensors", params.len()),
            got: format!("{}", grads.len()),
        });
    }
    state.step += 1;
    let t = state.step as i32;
    let bc1 = 1.0 - state.beta1.powi(t);
    let bc2 = 1.0 - state.beta2.powi(t);
    let (b1, b2, eps) = (state.beta1, state.beta2, state.epsilon);

    for (i, p) in params.tensors_mut().iter_mut().enumerate() {
        let g = grads[i].data();
        let m = state.m[i].data_mut();
        let v = state.v[i].data_mut();
        for ((pv, &gv), (mv, vv)) in p
            .data_mut()
            .iter_mut()
            .zip(g)
            .zip(m.iter_mut().zip(v.iter_mut()))
        {
            *mv = b1 * *mv + (1.0 - b1) * gv;
            *vv = b2 * *vv + (1.0 - b2) * gv * gv;
            let m_hat = *mv / bc1;
            let v_hat = *vv / bc2;
            *pv -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
    Ok(())
}
