//! Mini-batch training loop over recorded forward passes, plus the
//! finite-difference gradient-check harness that must pass before long runs.

use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::checkpoint::{save_checkpoint, Checkpoint};
use crate::dataset::{Dataset, Example, Split};
use crate::error::{Error, Result};
use crate::loss::{attach_loss, LossReport};
use crate::model::{dimension_forward_tape, ModelConfig, ParameterSet};
use crate::optim::{adam_step, lr_schedule, OptimizerState};
use crate::tape::Tape;
use crate::tensor::Tensor;

#[derive(Debug, Clone)]
pub struct TrainOptions {
    pub epochs: u64,
    pub batch_size: usize,
    pub lr0: f64,
    pub decay: f64,
    pub seed: u64,
    /// Save a checkpoint every this many epochs (and at the end).
    pub checkpoint_every: Option<u64>,
    pub checkpoint_dir: Option<PathBuf>,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            epochs: 10,
            batch_size: 4,
            lr0: 1e-4,
            decay: 0.95,
            seed: 0,
            checkpoint_every: None,
            checkpoint_dir: None,
        }
    }
}

/// One line of the structured training log. Validation metrics are filled in
/// on the last record of each epoch when the dataset has a test split.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct LogRecord {
    pub epoch: u64,
    pub step: u64,
    pub lr: f64,
    pub ploss: f64,
    pub kloss: Vec<f64>,
    pub sloss: Vec<f64>,
    pub tloss: f64,
    /// Primary and total loss divided by the element count of the two-channel
    /// real view, a readable per-pixel mean alongside the raw sums above.
    #[serde(default)]
    pub ploss_px: f64,
    #[serde(default)]
    pub tloss_px: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub val_psnr: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub val_ssim: Option<f64>,
}

#[derive(Debug)]
pub struct FitResult {
    pub params: ParameterSet,
    pub opt: OptimizerState,
    pub log: Vec<LogRecord>,
}

/// Forward + loss + backward for one example; returns the report and
/// per-parameter gradients.
pub fn example_grads(
    ex: &Example,
    params: &ParameterSet,
    config: &ModelConfig,
) -> Result<(LossReport, Vec<Tensor>)> {
    let mut tape = Tape::new();
    let mask = std::sync::Arc::new(ex.mask.clone());
    let nodes = dimension_forward_tape(&mut tape, &ex.k_u, &mask, params, config)?;
    let k_f = crate::fft::fft2_frames(&ex.s);
    let loss_nodes = attach_loss(&mut tape, &nodes, &ex.s, &k_f, config)?;
    let report = loss_nodes.report(&tape);
    let grads = tape.backward(loss_nodes.tloss, params)?;
    Ok((report, grads))
}

fn check_finite(report: &LossReport, epoch: u64, step: u64) -> Result<()> {
    if !report.ploss.is_finite() {
        return Err(Error::NonFinite(format!("ploss at epoch {epoch}, step {step}")));
    }
    for (i, k) in report.kloss_terms.iter().enumerate() {
        if !k.is_finite() {
            return Err(Error::NonFinite(format!(
                "kloss[{i}] at epoch {epoch}, step {step}"
            )));
        }
    }
    for (i, s) in report.sloss_terms.iter().enumerate() {
        if !s.is_finite() {
            return Err(Error::NonFinite(format!(
                "sloss[{i}] at epoch {epoch}, step {step}"
            )));
        }
    }
    Ok(())
}

/// Train from freshly initialized parameters.
pub fn fit(dataset: &Dataset, config: &ModelConfig, opts: &TrainOptions) -> Result<FitResult> {
    config.validate()?;
    let params = ParameterSet::he_init(config, opts.seed)?;
    let opt = OptimizerState::new(&params);
    fit_from(dataset, config, opts, params, opt, 0)
}

/// Resume training at `start_epoch` with existing parameters and optimizer
/// state. Epoch shuffles are drawn from per-epoch RNG streams, so a resumed
/// run replays the identical batch order of an unbroken run.
pub fn fit_from(
    dataset: &Dataset,
    config: &ModelConfig,
    opts: &TrainOptions,
    mut params: ParameterSet,
    mut opt: OptimizerState,
    start_epoch: u64,
) -> Result<FitResult> {
    let train: Vec<&Example> = dataset.split(Split::Train);
    if train.is_empty() {
        return Err(Error::Config("dataset has no training examples".into()));
    }
    if opts.batch_size == 0 {
        return Err(Error::Config("batch_size must be >= 1".into()));
    }

    let mut log = Vec::new();
    for epoch in start_epoch..opts.epochs {
        let lr = lr_schedule(opts.lr0, opts.decay, epoch);
        let mut order: Vec<usize> = (0..train.len()).collect();
        let mut rng = ChaCha20Rng::seed_from_u64(opts.seed);
        rng.set_stream(epoch + 1);
        order.shuffle(&mut rng);

        for batch in order.chunks(opts.batch_size) {
            let mut acc: Option<Vec<Tensor>> = None;
            let mut ploss = 0.0;
            let mut kloss = vec![0.0; config.m_blocks];
            let mut sloss = vec![0.0; config.n_blocks - 1];
            let mut tloss = 0.0;
            let mut px = 0.0;
            for &idx in batch {
                let ex = train[idx];
                px += 2.0 * ex.s.data().len() as f64;
                let (report, grads) = example_grads(ex, &params, config)?;
                check_finite(&report, epoch, opt.step)?;
                ploss += report.ploss;
                for (a, k) in kloss.iter_mut().zip(&report.kloss_terms) {
                    *a += k;
                }
                for (a, s) in sloss.iter_mut().zip(&report.sloss_terms) {
                    *a += s;
                }
                tloss += report.tloss;
                match &mut acc {
                    None => acc = Some(grads),
                    Some(acc) => {
                        for (a, g) in acc.iter_mut().zip(&grads) {
                            a.add_assign(g);
                        }
                    }
                }
            }
            let scale = 1.0 / batch.len() as f64;
            let mut grads = acc.expect("batch is non-empty");
            for g in &mut grads {
                g.scale(scale);
                if !g.is_finite() {
                    return Err(Error::NonFinite(format!(
                        "gradient at epoch {epoch}, step {}",
                        opt.step
                    )));
                }
            }
            adam_step(&mut opt, &mut params, &grads, lr)?;
            ploss *= scale;
            for k in &mut kloss {
                *k *= scale;
            }
            for s in &mut sloss {
                *s *= scale;
            }
            tloss *= scale;
            let px_mean = px / batch.len() as f64;
            log.push(LogRecord {
                epoch,
                step: opt.step,
                lr,
                ploss,
                kloss,
                sloss,
                tloss,
                ploss_px: ploss / px_mean,
                tloss_px: tloss / px_mean,
                val_psnr: None,
                val_ssim: None,
            });
        }

        if let Some((p, s)) = validation_metrics(dataset, &params, config)? {
            if let Some(last) = log.last_mut() {
                last.val_psnr = Some(p);
                last.val_ssim = s;
            }
        }

        let at_cadence = opts
            .checkpoint_every
            .is_some_and(|every| every > 0 && (epoch + 1) % every == 0);
        if at_cadence || (opts.checkpoint_dir.is_some() && epoch + 1 == opts.epochs) {
            if let Some(dir) = &opts.checkpoint_dir {
                std::fs::create_dir_all(dir)?;
                let cp = Checkpoint {
                    config: config.clone(),
                    params: params.clone(),
                    opt: opt.clone(),
                    next_epoch: epoch + 1,
                };
                save_checkpoint(&dir.join(format!("ckpt_epoch{:04}.dimc", epoch + 1)), &cp)?;
            }
        }
    }

    Ok(FitResult { params, opt, log })
}

/// Mean PSNR (and SSIM where frames are large enough for the 11x11 window)
/// over the test split, or None when the dataset has no test examples.
fn validation_metrics(
    dataset: &Dataset,
    params: &ParameterSet,
    config: &ModelConfig,
) -> Result<Option<(f64, Option<f64>)>> {
    let test = dataset.split(Split::Test);
    if test.is_empty() {
        return Ok(None);
    }
    let mut psnr_sum = 0.0;
    let mut ssim_sum = Some(0.0);
    for ex in &test {
        let mask = std::sync::Arc::new(ex.mask.clone());
        let trace = crate::model::dimension_forward(&ex.k_u, &mask, params, config)?;
        let reference = ex.s.magnitude();
        let recon = trace.reconstruction().magnitude();
        psnr_sum += crate::metrics::psnr(&reference, &recon)?;
        ssim_sum = match ssim_sum {
            Some(acc) => crate::metrics::ssim(&reference, &recon).ok().map(|s| acc + s),
            None => None,
        };
    }
    let n = test.len() as f64;
    Ok(Some((psnr_sum / n, ssim_sum.map(|s| s / n))))
}

#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub checked: usize,
    /// Worst error relative to max(|g|, 1e-8), the strict per-component
    /// definition.
    pub max_rel_error: f64,
    /// (tensor index, element index) of the worst parameter.
    pub worst: (usize, usize),
    /// Worst error relative to max(|g|, rms of all gradients): the FD
    /// quotient carries roundoff noise of order eps*|loss|/h, so components
    /// far below the overall gradient scale cannot be resolved relatively
    /// and are checked against that scale instead.
    pub max_scaled_error: f64,
    pub worst_scaled: (usize, usize),
}

/// Central finite-difference check of every parameter gradient of the full
/// multi-supervised loss on one example. The FD quotient is the independent
/// oracle the tape is validated against.
///
/// Evaluated at a randomized parameter point: biases are drawn away from
/// zero so no ReLU preactivation sits exactly on the kink (the undersampled
/// k-space is exactly zero off-mask, and zero biases would leave those
/// regions nondifferentiable, where one-sided FD quotients are meaningless).
pub fn gradient_check(ex: &Example, config: &ModelConfig, seed: u64, h: f64) -> Result<GradCheckReport> {
    let mut params = ParameterSet::he_init(config, seed)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x6269_6173);
    for t in params.tensors_mut() {
        if t.shape().len() == 1 {
            for v in t.data_mut() {
                let mag = rand::Rng::gen_range(&mut rng, 0.05..0.2);
                *v = if rand::Rng::gen::<bool>(&mut rng) { mag } else { -mag };
            }
        }
    }
    let (_, grads) = example_grads(ex, &params, config)?;
    let (sq_sum, count) = grads.iter().fold((0.0, 0usize), |(s, c), g| {
        (s + g.data().iter().map(|v| v * v).sum::<f64>(), c + g.numel())
    });
    let rms = (sq_sum / count as f64).sqrt().max(1e-12);

    let loss_at = |p: &ParameterSet| -> Result<f64> {
        let mut tape = Tape::new();
        let mask = std::sync::Arc::new(ex.mask.clone());
        let nodes = dimension_forward_tape(&mut tape, &ex.k_u, &mask, p, config)?;
        let k_f = crate::fft::fft2_frames(&ex.s);
        let loss_nodes = attach_loss(&mut tape, &nodes, &ex.s, &k_f, config)?;
        Ok(loss_nodes.report(&tape).tloss)
    };

    let mut checked = 0;
    let mut max_rel: f64 = 0.0;
    let mut worst = (0, 0);
    let mut max_scaled: f64 = 0.0;
    let mut worst_scaled = (0, 0);
    for ti in 0..params.len() {
        for ei in 0..params.tensor(ti).numel() {
            let mut plus = params.clone();
            plus.tensors_mut()[ti].data_mut()[ei] += h;
            let mut minus = params.clone();
            minus.tensors_mut()[ti].data_mut()[ei] -= h;
            let fd = (loss_at(&plus)? - loss_at(&minus)?) / (2.0 * h);
            let g = grads[ti].data()[ei];
            let err = (fd - g).abs();
            let rel = err / g.abs().max(1e-8);
            if rel > max_rel {
                max_rel = rel;
                worst = (ti, ei);
            }
            let scaled = err / g.abs().max(rms);
            if scaled > max_scaled {
                max_scaled = scaled;
                worst_scaled = (ti, ei);
            }
            checked += 1;
        }
    }
    Ok(GradCheckReport {
        checked,
        max_rel_error: max_rel,
        worst,
        max_scaled_error: max_scaled,
        worst_scaled,
    })
}
