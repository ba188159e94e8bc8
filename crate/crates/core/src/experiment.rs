//! End-to-end experiment pipeline: dataset preparation, training, held-out
//! evaluation against the zero-filled baseline, artifact emission, report
//! verification and the alpha_1 sweep.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use crate::binio::{read_file, write_file, Decoder, Encoder};
use crate::config::ExperimentConfig;
use crate::dataset::{Dataset, Example, Split};
use crate::error::{Error, Result};
use crate::metrics::{mse, psnr, ssim};
use crate::model::{dimension_forward, ModelConfig, ParameterSet};
use crate::report::{error_map, frame_image, mask_image, to_gray, yt_extract, ExampleMetrics, MetricsReport};
use crate::train::{fit, FitResult, LogRecord};
use crate::volume::RealVolume;

const VOLUMES_MAGIC: &[u8; 4] = b"DIMV";
const VOLUMES_VERSION: u32 = 1;

/// Magnitude volumes kept from one evaluated test example, sufficient to
/// re-derive every number in the metrics table.
#[derive(Debug, Clone)]
pub struct EvalVolumes {
    pub index: usize,
    pub reference: RealVolume,
    pub recon: RealVolume,
    pub zero_filled: RealVolume,
    pub recon_seconds: f64,
}

#[derive(Debug)]
pub struct EvalOutcome {
    pub report: MetricsReport,
    pub volumes: Vec<EvalVolumes>,
}

fn eval_one(index: usize, ex: &Example, params: &ParameterSet, model: &ModelConfig) -> Result<(ExampleMetrics, EvalVolumes)> {
    let mask = Arc::new(ex.mask.clone());
    let started = Instant::now();
    let trace = dimension_forward(&ex.k_u, &mask, params, model)?;
    let recon_seconds = started.elapsed().as_secs_f64();

    let reference = ex.s.magnitude();
    let recon = trace.reconstruction().magnitude();
    let zero_filled = crate::sampling::zero_filled_recon(&ex.k_u).magnitude();

    let row = ExampleMetrics {
        index,
        mse: mse(&reference, &recon)?,
        psnr: psnr(&reference, &recon)?,
        ssim: ssim(&reference, &recon)?,
        zf_mse: mse(&reference, &zero_filled)?,
        zf_psnr: psnr(&reference, &zero_filled)?,
        zf_ssim: ssim(&reference, &zero_filled)?,
        recon_seconds,
    };
    Ok((
        row,
        EvalVolumes {
            index,
            reference,
            recon,
            zero_filled,
            recon_seconds,
        },
    ))
}

/// Evaluate trained parameters on a set of examples, in parallel across
/// examples. Rows keep the input order regardless of completion order.
pub fn evaluate(examples: &[&Example], params: &ParameterSet, model: &ModelConfig) -> Result<EvalOutcome> {
    if examples.is_empty() {
        return Err(Error::Config("evaluation set is empty".into()));
    }
    let threads = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(examples.len());

    let results: Vec<Result<(ExampleMetrics, EvalVolumes)>> = if threads <= 1 {
        examples
            .iter()
            .enumerate()
            .map(|(i, ex)| eval_one(i, ex, params, model))
            .collect()
    } else {
        let mut slots: Vec<Option<Result<(ExampleMetrics, EvalVolumes)>>> =
            (0..examples.len()).map(|_| None).collect();
        std::thread::scope(|scope| {
            for (chunk_idx, slot_chunk) in slots.chunks_mut(examples.len().div_ceil(threads)).enumerate() {
                let base = chunk_idx * examples.len().div_ceil(threads);
                let examples = &examples;
                scope.spawn(move || {
                    for (off, slot) in slot_chunk.iter_mut().enumerate() {
                        let i = base + off;
                        *slot = Some(eval_one(i, examples[i], params, model));
                    }
                });
            }
        });
        slots.into_iter().map(|s| s.expect("all slots filled")).collect()
    };

    let mut rows = Vec::with_capacity(examples.len());
    let mut volumes = Vec::with_capacity(examples.len());
    for r in results {
        let (row, vols) = r?;
        rows.push(row);
        volumes.push(vols);
    }
    Ok(EvalOutcome {
        report: MetricsReport::from_rows(rows),
        volumes,
    })
}

fn put_real_volume(enc: &mut Encoder, v: &RealVolume) {
    let (nx, ny, nt) = v.dims();
    enc.put_usize(nx);
    enc.put_usize(ny);
    enc.put_usize(nt);
    enc.put_f64_slice(v.data());
}

fn get_real_volume(dec: &mut Decoder) -> Result<RealVolume> {
    let nx = dec.get_usize()?;
    let ny = dec.get_usize()?;
    let nt = dec.get_usize()?;
    let data = dec.get_f64_vec()?;
    RealVolume::from_data(nx, ny, nt, data)
}

/// Persist evaluated volumes so `verify` can recompute the metrics table.
pub fn save_volumes(path: &Path, volumes: &[EvalVolumes]) -> Result<()> {
    let mut enc = Encoder::new();
    enc.put_usize(volumes.len());
    for v in volumes {
        enc.put_usize(v.index);
        enc.put_f64(v.recon_seconds);
        put_real_volume(&mut enc, &v.reference);
        put_real_volume(&mut enc, &v.recon);
        put_real_volume(&mut enc, &v.zero_filled);
    }
    write_file(path, VOLUMES_MAGIC, VOLUMES_VERSION, &enc.into_bytes())
}

pub fn load_volumes(path: &Path) -> Result<Vec<EvalVolumes>> {
    let payload = read_file(path, VOLUMES_MAGIC, VOLUMES_VERSION)?;
    let mut dec = Decoder::new(&payload, &path.display().to_string());
    let count = dec.get_usize()?;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let index = dec.get_usize()?;
        let recon_seconds = dec.get_f64()?;
        let reference = get_real_volume(&mut dec)?;
        let recon = get_real_volume(&mut dec)?;
        let zero_filled = get_real_volume(&mut dec)?;
        out.push(EvalVolumes {
            index,
            reference,
            recon,
            zero_filled,
            recon_seconds,
        });
    }
    if !dec.finished() {
        return Err(Error::Format {
            path: path.display().to_string(),
            reason: "trailing bytes after last record".into(),
        });
    }
    Ok(out)
}

/// Recompute the metrics report from stored volumes.
pub fn report_from_volumes(volumes: &[EvalVolumes]) -> Result<MetricsReport> {
    let mut rows = Vec::with_capacity(volumes.len());
    for v in volumes {
        rows.push(ExampleMetrics {
            index: v.index,
            mse: mse(&v.reference, &v.recon)?,
            psnr: psnr(&v.reference, &v.recon)?,
            ssim: ssim(&v.reference, &v.recon)?,
            zf_mse: mse(&v.reference, &v.zero_filled)?,
            zf_psnr: psnr(&v.reference, &v.zero_filled)?,
            zf_ssim: ssim(&v.reference, &v.zero_filled)?,
            recon_seconds: v.recon_seconds,
        });
    }
    Ok(MetricsReport::from_rows(rows))
}

#[derive(Debug)]
pub struct RunArtifacts {
    pub report: MetricsReport,
    pub fit: FitResult,
    pub output_dir: PathBuf,
}

fn write_training_log(path: &Path, log: &[LogRecord]) -> Result<()> {
    let mut text = String::new();
    for record in log {
        let line = serde_json::to_string(record)
            .map_err(|e| Error::Config(format!("serializing log record: {e}")))?;
        text.push_str(&line);
        text.push('\n');
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn write_images(dir: &Path, cfg: &ExperimentConfig, outcome: &EvalOutcome, test: &[&Example]) -> Result<()> {
    if let Some(first) = test.first() {
        mask_image(&first.mask).write_pgm(&dir.join("mask.pgm"))?;
    }
    for v in outcome.volumes.iter().take(3) {
        let (nx, _, nt) = v.reference.dims();
        let maps = error_map(&v.reference, &v.recon, cfg.error_map_max)?;
        for (t, img) in maps.iter().enumerate() {
            img.write_pgm(&dir.join(format!("error_ex{:02}_t{:02}.pgm", v.index, t)))?;
        }
        for t in [0, nt / 2] {
            frame_image(&v.recon, t).write_pgm(&dir.join(format!("recon_ex{:02}_t{:02}.pgm", v.index, t)))?;
            frame_image(&v.reference, t).write_pgm(&dir.join(format!("ref_ex{:02}_t{:02}.pgm", v.index, t)))?;
        }
        let x = cfg.yt_x.unwrap_or(nx / 2);
        let (_, ny, _) = v.reference.dims();
        to_gray(&yt_extract(&v.recon, x)?, nt, ny).write_pgm(&dir.join(format!("yt_recon_ex{:02}.pgm", v.index)))?;
        to_gray(&yt_extract(&v.reference, x)?, nt, ny).write_pgm(&dir.join(format!("yt_ref_ex{:02}.pgm", v.index)))?;
    }
    Ok(())
}

fn stage<T>(name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Config(format!("stage '{name}': {e}")))
}

/// The full pipeline: dataset, training, held-out evaluation and artifact
/// emission into the configured output directory.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunArtifacts> {
    cfg.validate()?;
    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("resolved.cfg"), cfg.resolved_text())?;

    let dataset = stage(
        "dataset",
        match &cfg.dataset_path {
            Some(path) => Dataset::load(path),
            None => Dataset::generate(&cfg.dataset),
        },
    )?;

    let mut train_opts = cfg.train.clone();
    train_opts.checkpoint_dir = Some(dir.join("checkpoints"));
    let fit_result = stage("train", fit(&dataset, &cfg.model, &train_opts))?;
    stage(
        "train-log",
        write_training_log(&dir.join("train_log.jsonl"), &fit_result.log),
    )?;

    let test = dataset.split(Split::Test);
    let outcome = stage("eval", evaluate(&test, &fit_result.params, &cfg.model))?;

    stage("report", {
        std::fs::write(dir.join("metrics.csv"), outcome.report.to_csv())?;
        save_volumes(&dir.join("volumes.dimv"), &outcome.volumes)
    })?;
    stage("images", write_images(dir, cfg, &outcome, &test))?;

    Ok(RunArtifacts {
        report: outcome.report,
        fit: fit_result,
        output_dir: dir.clone(),
    })
}

#[derive(Debug)]
pub struct VerifyReport {
    pub rows: usize,
    /// True when the recomputed CSV is byte-identical to the stored one.
    pub csv_matches: bool,
}

/// Recompute every metric from the stored volumes and diff against the
/// emitted CSV.
pub fn verify_run(output_dir: &Path) -> Result<VerifyReport> {
    let volumes = load_volumes(&output_dir.join("volumes.dimv"))?;
    let recomputed = report_from_volumes(&volumes)?;
    let stored = std::fs::read_to_string(output_dir.join("metrics.csv"))?;
    Ok(VerifyReport {
        rows: volumes.len(),
        csv_matches: recomputed.to_csv() == stored,
    })
}

pub const DEFAULT_SWEEP_ALPHA1: [f64; 8] = [1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1];

/// One full experiment per alpha_1 value, each in its own subdirectory, plus
/// a summary CSV. Runs are distributed over `jobs` worker threads.
pub fn sweep(cfg: &ExperimentConfig, jobs: usize) -> Result<Vec<(f64, MetricsReport)>> {
    if cfg.model.m_blocks == 0 {
        return Err(Error::Config(
            "alpha_1 sweep needs a model with at least one frequency-domain block".into(),
        ));
    }
    let values: Vec<f64> = if cfg.sweep_alpha1.is_empty() {
        DEFAULT_SWEEP_ALPHA1.to_vec()
    } else {
        cfg.sweep_alpha1.clone()
    };

    let run_one = |&alpha: &f64| -> Result<(f64, MetricsReport)> {
        let mut sub = cfg.clone();
        sub.model.loss_alpha[0] = alpha;
        sub.sweep_alpha1 = Vec::new();
        sub.output_dir = cfg.output_dir.join(format!("alpha1_{alpha:e}"));
        let artifacts = run_experiment(&sub)?;
        Ok((alpha, artifacts.report))
    };

    let mut results: Vec<(f64, MetricsReport)> = if jobs <= 1 {
        values.iter().map(run_one).collect::<Result<_>>()?
    } else {
        let mut slots: Vec<Option<Result<(f64, MetricsReport)>>> =
            (0..values.len()).map(|_| None).collect();
        std::thread::scope(|scope| {
            let chunk = values.len().div_ceil(jobs);
            for (ci, slot_chunk) in slots.chunks_mut(chunk).enumerate() {
                let values = &values;
                let run_one = &run_one;
                scope.spawn(move || {
                    for (off, slot) in slot_chunk.iter_mut().enumerate() {
                        *slot = Some(run_one(&values[ci * chunk + off]));
                    }
                });
            }
        });
        slots
            .into_iter()
            .map(|s| s.expect("all slots filled"))
            .collect::<Result<_>>()?
    };
    results.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut summary = String::from("alpha1,mean_mse,mean_psnr,mean_ssim,mean_zf_psnr\n");
    for (alpha, report) in &results {
        summary.push_str(&format!(
            "{alpha:e},{:.17e},{:.17e},{:.17e},{:.17e}\n",
            report.mean_mse, report.mean_psnr, report.mean_ssim, report.mean_zf_psnr
        ));
    }
    std::fs::create_dir_all(&cfg.output_dir)?;
    std::fs::write(cfg.output_dir.join("sweep.csv"), summary)?;
    Ok(results)
}
