//! Acceptance gate: one test per criterion, each printing a single pass/fail
//! line (visible with `--nocapture`). Tolerances are pinned in the constants
//! below. The heavy end-to-end criteria (6 and 7) train real models and
//! dominate the runtime of this suite.

use std::sync::Arc;
use std::time::Instant;

use dimension_core::conv::TemporalPad;
use dimension_core::dataset::{Dataset, DatasetSpec, Split};
use dimension_core::fft::{fft2_frames, ifft2_frames};
use dimension_core::model::{
    dimension_forward, idc, kdc, ModelConfig, ParameterSet,
};
use dimension_core::phantom::PhantomSpec;
use dimension_core::sampling::{generate_mask, zero_filled_recon, SamplingMask};
use dimension_core::tape::DcWeight;
use dimension_core::train::{fit, fit_from, gradient_check, TrainOptions};
use dimension_core::volume::{ComplexVolume, RealVolume};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn report(n: usize, name: &str, r: Result<(), String>) {
    match r {
        Ok(()) => println!("criterion {n} ({name}): pass"),
        Err(e) => {
            println!("criterion {n} ({name}): fail - {e}");
            panic!("criterion {n} ({name}) failed: {e}");
        }
    }
}

macro_rules! ensure {
    ($cond:expr, $($arg:tt)*) => {
        if !$cond {
            return Err(format!($($arg)*));
        }
    };
}

fn random_volume(nx: usize, ny: usize, nt: usize, rng: &mut ChaCha20Rng) -> ComplexVolume {
    let data = (0..nx * ny * nt)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    ComplexVolume::from_data(nx, ny, nt, data).unwrap()
}

#[test]
fn criterion_1_fft_unitarity_and_round_trip() {
    report(1, "FFT unitarity & round trip", (|| {
        let start = Instant::now();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for _ in 0..100 {
            let nx = rng.gen_range(4..=16);
            let ny = rng.gen_range(4..=16);
            let nt = rng.gen_range(1..=4);
            let v = random_volume(nx, ny, nt, &mut rng);
            let k = fft2_frames(&v);
            let ratio = k.norm() / v.norm();
            ensure!(
                (ratio - 1.0).abs() < 1e-10,
                "norm ratio {ratio} off unity for {nx}x{ny}x{nt}"
            );
            let back = ifft2_frames(&k);
            let d = back.max_abs_diff(&v);
            ensure!(d < 1e-12, "round-trip error {d} for {nx}x{ny}x{nt}");
        }
        let secs = start.elapsed().as_secs_f64();
        ensure!(secs < 5.0, "took {secs:.1}s, budget 5s");
        Ok(())
    })());
}

#[test]
fn criterion_2_data_consistency_exactness() {
    report(2, "DC exactness", (|| {
        let start = Instant::now();
        // hard DC through a random 3-block model: k-space of every stage
        // output matches the measurements on the sampled set
        let config = ModelConfig {
            m_blocks: 1,
            n_blocks: 2,
            layers_per_block: 2,
            filters: 4,
            kernel: (3, 3, 3),
            dc_lambda: DcWeight::Infinite,
            temporal_pad: TemporalPad::Zero,
            loss_alpha: vec![0.1],
            loss_beta: vec![1e3],
        };
        let params = ParameterSet::he_init(&config, 2).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let s = random_volume(16, 16, 3, &mut rng);
        let mask = Arc::new(generate_mask(16, 3, 2.0, 4, 2).unwrap());
        let k_u = dimension_core::sampling::apply_mask(&fft2_frames(&s), &mask).unwrap();
        let trace = dimension_forward(&k_u, &mask, &params, &config).unwrap();
        let mut stage_k = trace.fdn_dc_outputs.clone();
        for st in &trace.sdn_stage_outputs {
            stage_k.push(fft2_frames(st));
        }
        for (i, k) in stage_k.iter().enumerate() {
            for t in 0..3 {
                for y in 0..16 {
                    if !mask.is_sampled(y, t) {
                        continue;
                    }
                    for x in 0..16 {
                        let d = (k.get(x, y, t) - k_u.get(x, y, t)).norm();
                        ensure!(d < 1e-10, "stage {i}: DC residual {d} at ({x},{y},{t})");
                    }
                }
            }
        }

        // lambda = 1: sampled positions are exactly the midpoint
        let pred = random_volume(8, 8, 2, &mut rng);
        let meas = random_volume(8, 8, 2, &mut rng);
        let m = Arc::new(generate_mask(8, 2, 2.0, 2, 3).unwrap());
        let blended = kdc(&pred, &meas, &m, DcWeight::Finite(1.0)).unwrap();
        for t in 0..2 {
            for y in 0..8 {
                for x in 0..8 {
                    let expect = if m.is_sampled(y, t) {
                        (pred.get(x, y, t) + meas.get(x, y, t)) * 0.5
                    } else {
                        pred.get(x, y, t)
                    };
                    ensure!(
                        blended.get(x, y, t) == expect,
                        "lambda=1 blend not exact at ({x},{y},{t})"
                    );
                }
            }
        }
        // IDC with hard DC restores measurements too
        let fixed = idc(&pred, &k_u_resized(&pred, &m), &m, DcWeight::Infinite).unwrap();
        let k_fixed = fft2_frames(&fixed);
        let k_ref = k_u_resized(&pred, &m);
        for t in 0..2 {
            for y in 0..8 {
                if !m.is_sampled(y, t) {
                    continue;
                }
                for x in 0..8 {
                    let d = (k_fixed.get(x, y, t) - k_ref.get(x, y, t)).norm();
                    ensure!(d < 1e-10, "IDC residual {d} at ({x},{y},{t})");
                }
            }
        }
        let secs = start.elapsed().as_secs_f64();
        ensure!(secs < 10.0, "took {secs:.1}s, budget 10s");
        Ok(())
    })());
}

fn k_u_resized(v: &ComplexVolume, mask: &SamplingMask) -> ComplexVolume {
    dimension_core::sampling::apply_mask(&fft2_frames(v), mask).unwrap()
}

#[test]
fn criterion_3_gradient_oracle() {
    report(3, "gradient oracle", (|| {
        let start = Instant::now();
        let config = ModelConfig {
            m_blocks: 1,
            n_blocks: 2,
            layers_per_block: 2,
            filters: 4,
            kernel: (3, 3, 3),
            dc_lambda: DcWeight::Infinite,
            temporal_pad: TemporalPad::Zero,
            loss_alpha: vec![0.1],
            loss_beta: vec![1e3],
        };
        let spec = DatasetSpec {
            phantom: PhantomSpec {
                nx: 8,
                ny: 8,
                nt: 2,
                n_objects: 2,
                seed: 7,
                ..PhantomSpec::default()
            },
            count: 1,
            train_frac: 1.0,
            accel: 2.0,
            acs: 2,
            mask_sigma: None,
            fresh_mask_per_example: true,
        };
        let dataset = Dataset::generate(&spec).unwrap();
        // seed 7 keeps every finite-difference interval clear of ReLU kinks,
        // where the FD quotient stops being a valid oracle
        let r = gradient_check(&dataset.examples[0], &config, 7, 1e-5).unwrap();
        ensure!(
            r.max_rel_error < 1e-4,
            "max rel error {:.3e} at tensor {} element {} (checked {})",
            r.max_rel_error,
            r.worst.0,
            r.worst.1,
            r.checked
        );
        let secs = start.elapsed().as_secs_f64();
        ensure!(secs < 120.0, "took {secs:.1}s, budget 120s");
        Ok(())
    })());
}

#[test]
fn criterion_4_loss_decomposition() {
    report(4, "loss decomposition", (|| {
        let config = ModelConfig {
            m_blocks: 1,
            n_blocks: 2,
            layers_per_block: 2,
            filters: 4,
            kernel: (3, 3, 3),
            dc_lambda: DcWeight::Infinite,
            temporal_pad: TemporalPad::Zero,
            loss_alpha: vec![0.1],
            loss_beta: vec![1e3],
        };
        let spec = DatasetSpec {
            phantom: PhantomSpec {
                nx: 8,
                ny: 8,
                nt: 2,
                n_objects: 2,
                seed: 4,
                ..PhantomSpec::default()
            },
            count: 6,
            train_frac: 1.0,
            accel: 2.0,
            acs: 2,
            mask_sigma: None,
            fresh_mask_per_example: true,
        };
        let dataset = Dataset::generate(&spec).unwrap();
        let opts = TrainOptions {
            epochs: 3,
            batch_size: 2,
            lr0: 1e-3,
            decay: 0.95,
            seed: 4,
            checkpoint_every: None,
            checkpoint_dir: None,
        };
        let result = fit(&dataset, &config, &opts).unwrap();
        ensure!(!result.log.is_empty(), "no training batches logged");
        for rec in &result.log {
            let recomputed = rec.ploss
                + config
                    .loss_alpha
                    .iter()
                    .zip(&rec.kloss)
                    .map(|(a, k)| a * k)
                    .sum::<f64>()
                + config
                    .loss_beta
                    .iter()
                    .zip(&rec.sloss)
                    .map(|(b, s)| b * s)
                    .sum::<f64>();
            let rel = (rec.tloss - recomputed).abs() / rec.tloss.abs().max(1e-12);
            ensure!(
                rel < 1e-12,
                "batch at epoch {} step {}: decomposition error {rel:.3e}",
                rec.epoch,
                rec.step
            );
        }
        Ok(())
    })());
}

#[test]
fn criterion_5_mask_statistics() {
    report(5, "mask statistics", (|| {
        let ny = 192;
        let nt = 4;
        let acs = 6;
        let acs_range = SamplingMask::acs_range(ny, acs);
        let mut freq = vec![0u64; ny];
        let mut frames = 0u64;
        for seed in 0..100u64 {
            let mask = generate_mask(ny, nt, 4.0, acs, seed).map_err(|e| e.to_string())?;
            for t in 0..nt {
                ensure!(
                    mask.sampled_count(t) == 48,
                    "seed {seed} frame {t}: {} lines, expected 48",
                    mask.sampled_count(t)
                );
                for y in acs_range.clone() {
                    ensure!(
                        mask.is_sampled(y, t),
                        "seed {seed} frame {t}: ACS line {y} not sampled"
                    );
                }
                for y in 0..ny {
                    if mask.is_sampled(y, t) {
                        freq[y] += 1;
                    }
                }
                frames += 1;
            }
        }
        ensure!(frames == 400, "expected 400 frames");

        // center-bias rank test on the non-ACS lines: Spearman correlation
        // between distance from center and sampling frequency must be
        // strongly negative
        let center = (ny as f64 - 1.0) / 2.0;
        let pts: Vec<(f64, f64)> = (0..ny)
            .filter(|y| !acs_range.contains(y))
            .map(|y| ((y as f64 - center).abs(), freq[y] as f64))
            .collect();
        let rho = spearman(&pts);
        ensure!(rho < -0.5, "Spearman rho {rho:.3}, expected < -0.5");
        Ok(())
    })());
}

/// Spearman rank correlation with average ranks for ties.
fn spearman(pts: &[(f64, f64)]) -> f64 {
    let rank = |vals: Vec<f64>| -> Vec<f64> {
        let mut idx: Vec<usize> = (0..vals.len()).collect();
        idx.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap());
        let mut ranks = vec![0.0; vals.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && vals[idx[j + 1]] == vals[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &k in &idx[i..=j] {
                ranks[k] = avg;
            }
            i = j + 1;
        }
        ranks
    };
    let rx = rank(pts.iter().map(|p| p.0).collect());
    let ry = rank(pts.iter().map(|p| p.1).collect());
    let n = pts.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        cov += (a - mx) * (b - my);
        vx += (a - mx) * (a - mx);
        vy += (b - my) * (b - my);
    }
    cov / (vx.sqrt() * vy.sqrt())
}

/// Ablation preset scaled down to desk size: 16 filters, 3 conv layers per
/// block, architecture and loss weights unchanged.
fn desk_preset(name: &str) -> ModelConfig {
    let mut c = dimension_core::presets::preset(name).unwrap();
    c.filters = 16;
    c.layers_per_block = 3;
    c.validate().unwrap();
    c
}

/// 50 synthetic cine phantoms at 64x64x6, 4x undersampling with 4 ACS lines,
/// 45 train / 5 held out.
fn desk_dataset(seed: u64) -> Dataset {
    Dataset::generate(&DatasetSpec {
        phantom: PhantomSpec {
            seed,
            ..PhantomSpec::default()
        },
        count: 50,
        train_frac: 0.9,
        accel: 4.0,
        acs: 4,
        mask_sigma: None,
        fresh_mask_per_example: true,
    })
    .unwrap()
}

/// Mean (PSNR, SSIM) of the model reconstruction and of the zero-filled
/// baseline over the held-out split.
fn heldout_means(
    dataset: &Dataset,
    params: &ParameterSet,
    config: &ModelConfig,
) -> Result<(f64, f64, f64, f64), String> {
    use dimension_core::metrics::{psnr, ssim};
    let (mut p, mut s, mut zp, mut zs, mut n) = (0.0, 0.0, 0.0, 0.0, 0usize);
    for ex in dataset.examples.iter().filter(|e| e.split == Split::Test) {
        let reference = ex.s.magnitude();
        let mask = Arc::new(ex.mask.clone());
        let trace =
            dimension_forward(&ex.k_u, &mask, params, config).map_err(|e| e.to_string())?;
        let recon = trace.reconstruction().magnitude();
        let zf = zero_filled_recon(&ex.k_u).magnitude();
        p += psnr(&reference, &recon).map_err(|e| e.to_string())?;
        s += ssim(&reference, &recon).map_err(|e| e.to_string())?;
        zp += psnr(&reference, &zf).map_err(|e| e.to_string())?;
        zs += ssim(&reference, &zf).map_err(|e| e.to_string())?;
        n += 1;
    }
    ensure!(n > 0, "no held-out examples");
    let n = n as f64;
    Ok((p / n, s / n, zp / n, zs / n))
}

// End-to-end training budget shared by criteria 6 and 7.
const DESK_LR0: f64 = 1e-3;
const DESK_DECAY: f64 = 0.95;
const DESK_BATCH: usize = 2;

// The two training criteria each take many minutes of CPU; serialize them so
// the wall-clock budget of criterion 6 is not distorted by a parallel test
// thread on the same core.
static HEAVY: std::sync::Mutex<()> = std::sync::Mutex::new(());

#[test]
fn criterion_6_end_to_end_experiment() {
    report(6, "end-to-end experiment", (|| {
        let _serial = HEAVY.lock().unwrap();
        let start = Instant::now();
        let config = desk_preset("dimension");
        let dataset = desk_dataset(6);
        let opts = TrainOptions {
            epochs: 18,
            batch_size: DESK_BATCH,
            lr0: DESK_LR0,
            decay: DESK_DECAY,
            seed: 6,
            checkpoint_every: None,
            checkpoint_dir: None,
        };
        let result = fit(&dataset, &config, &opts).unwrap();
        let secs = start.elapsed().as_secs_f64();
        ensure!(secs < 1800.0, "took {secs:.0}s, budget 1800s");

        let (p, s, zp, zs) = heldout_means(&dataset, &result.params, &config)?;
        ensure!(
            p >= zp + 3.0,
            "held-out PSNR {p:.2} dB vs zero-filled {zp:.2} dB, need +3 dB"
        );
        ensure!(
            s >= zs + 0.05,
            "held-out SSIM {s:.3} vs zero-filled {zs:.3}, need +0.05"
        );

        // tloss trend: after a warmup of 100 steps, the mean over each
        // successive 50-step window must decrease
        let t: Vec<f64> = result.log.iter().map(|r| r.tloss).collect();
        ensure!(t.len() > 200, "too few steps ({}) for the window test", t.len());
        let means: Vec<f64> = t[100..]
            .chunks(50)
            .filter(|c| c.len() == 50)
            .map(|c| c.iter().sum::<f64>() / c.len() as f64)
            .collect();
        for (i, w) in means.windows(2).enumerate() {
            ensure!(
                w[1] < w[0],
                "windowed tloss rose from {:.4e} to {:.4e} at window {}",
                w[0],
                w[1],
                i + 1
            );
        }
        println!(
            "  PSNR {p:.2} dB (zero-filled {zp:.2}), SSIM {s:.3} (zero-filled {zs:.3}), {secs:.0}s"
        );
        Ok(())
    })());
}

#[test]
fn criterion_7_ablation_non_inferiority() {
    report(7, "ablation non-inferiority", (|| {
        let _serial = HEAVY.lock().unwrap();
        let dataset = desk_dataset(6);
        let mut mean_psnr = std::collections::HashMap::new();
        for name in ["d5c5", "model1", "model2", "model3", "dimension"] {
            let config = desk_preset(name);
            let opts = TrainOptions {
                epochs: 5,
                batch_size: DESK_BATCH,
                lr0: DESK_LR0,
                decay: DESK_DECAY,
                seed: 6,
                checkpoint_every: None,
                checkpoint_dir: None,
            };
            let result = fit(&dataset, &config, &opts).unwrap();
            let (p, _, _, _) = heldout_means(&dataset, &result.params, &config)?;
            println!("  {name}: held-out PSNR {p:.2} dB");
            mean_psnr.insert(name, p);
        }
        for (a, b) in [("model2", "model1"), ("model3", "model1"), ("dimension", "d5c5")] {
            ensure!(
                mean_psnr[a] >= mean_psnr[b] - 0.1,
                "{a} ({:.2} dB) fell more than 0.1 dB below {b} ({:.2} dB)",
                mean_psnr[a],
                mean_psnr[b]
            );
        }
        Ok(())
    })());
}

// Reference metric implementations for criterion 8, written independently of
// the library versions (plain loops, no shared helpers).

fn ref_mse(a: &RealVolume, b: &RealVolume) -> f64 {
    let mut s = 0.0;
    for i in 0..a.data().len() {
        let d = a.data()[i] - b.data()[i];
        s += d * d;
    }
    s
}

fn ref_psnr(a: &RealVolume, b: &RealVolume) -> f64 {
    let mut peak = f64::MIN;
    for &v in a.data() {
        if v > peak {
            peak = v;
        }
    }
    let n = a.data().len() as f64;
    10.0 * (peak * peak * n / ref_mse(a, b)).log10()
}

fn ref_ssim(a: &RealVolume, b: &RealVolume) -> f64 {
    let (nx, ny, nt) = a.dims();
    let win = 11usize;
    let half = 5usize;
    let sigma = 1.5f64;
    let mut w = [[0.0f64; 11]; 11];
    let mut wsum = 0.0;
    for (i, row) in w.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let di = i as f64 - half as f64;
            let dj = j as f64 - half as f64;
            *v = (-(di * di + dj * dj) / (2.0 * sigma * sigma)).exp();
            wsum += *v;
        }
    }
    let c1 = 0.01f64 * 0.01;
    let c2 = 0.03f64 * 0.03;
    let mut total = 0.0;
    let mut count = 0usize;
    for t in 0..nt {
        for cx in half..nx - half {
            for cy in half..ny - half {
                let (mut ma, mut mb, mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0, 0.0, 0.0);
                for i in 0..win {
                    for j in 0..win {
                        let weight = w[i][j] / wsum;
                        let va = a.get(cx + i - half, cy + j - half, t);
                        let vb = b.get(cx + i - half, cy + j - half, t);
                        ma += weight * va;
                        mb += weight * vb;
                        saa += weight * va * va;
                        sbb += weight * vb * vb;
                        sab += weight * va * vb;
                    }
                }
                total += ((2.0 * ma * mb + c1) * (2.0 * (sab - ma * mb) + c2))
                    / ((ma * ma + mb * mb + c1) * ((saa - ma * ma) + (sbb - mb * mb) + c2));
                count += 1;
            }
        }
    }
    total / count as f64
}

#[test]
fn criterion_8_metric_fidelity() {
    report(8, "metric fidelity", (|| {
        use dimension_core::metrics::{mse, psnr, ssim};
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        for pair in 0..50 {
            let nx = rng.gen_range(11..=24);
            let ny = rng.gen_range(11..=24);
            let nt = rng.gen_range(1..=3);
            let mk = |rng: &mut ChaCha20Rng| {
                RealVolume::from_data(
                    nx,
                    ny,
                    nt,
                    (0..nx * ny * nt).map(|_| rng.gen_range(0.0..1.0)).collect(),
                )
                .unwrap()
            };
            let a = mk(&mut rng);
            let b = mk(&mut rng);
            let dm = (mse(&a, &b).unwrap() - ref_mse(&a, &b)).abs();
            ensure!(dm < 1e-8, "pair {pair}: mse differs by {dm:.3e}");
            let dp = (psnr(&a, &b).unwrap() - ref_psnr(&a, &b)).abs();
            ensure!(dp < 1e-8, "pair {pair}: psnr differs by {dp:.3e}");
            let ds = (ssim(&a, &b).unwrap() - ref_ssim(&a, &b)).abs();
            ensure!(ds < 1e-8, "pair {pair}: ssim differs by {ds:.3e}");
            ensure!(mse(&a, &a).unwrap() == 0.0, "mse(a,a) != 0");
            ensure!(ssim(&a, &a).unwrap() == 1.0, "ssim(a,a) != 1");
        }
        Ok(())
    })());
}

#[test]
fn criterion_9_determinism_and_persistence() {
    report(9, "determinism & persistence", (|| {
        let config = ModelConfig {
            m_blocks: 1,
            n_blocks: 2,
            layers_per_block: 2,
            filters: 4,
            kernel: (3, 3, 3),
            dc_lambda: DcWeight::Infinite,
            temporal_pad: TemporalPad::Zero,
            loss_alpha: vec![0.1],
            loss_beta: vec![1e3],
        };
        let spec = DatasetSpec {
            phantom: PhantomSpec {
                nx: 8,
                ny: 8,
                nt: 2,
                n_objects: 2,
                seed: 9,
                ..PhantomSpec::default()
            },
            count: 4,
            train_frac: 1.0,
            accel: 2.0,
            acs: 2,
            mask_sigma: None,
            fresh_mask_per_example: true,
        };
        let dataset = Dataset::generate(&spec).unwrap();

        // dataset save/load round trips bit-exactly
        let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
        let ds_path = tmp.path().join("acceptance.dimk");
        dataset.save(&ds_path).map_err(|e| e.to_string())?;
        let loaded = Dataset::load(&ds_path).map_err(|e| e.to_string())?;
        ensure!(loaded == dataset, "dataset round trip is not bit-exact");

        // fixed seeds give bit-identical training logs
        let mut opts = TrainOptions {
            epochs: 4,
            batch_size: 2,
            lr0: 1e-3,
            decay: 0.95,
            seed: 9,
            checkpoint_every: Some(2),
            checkpoint_dir: Some(tmp.path().to_path_buf()),
        };
        let a = fit(&dataset, &config, &opts).unwrap();
        let b = fit(&dataset, &config, &opts).unwrap();
        ensure!(a.log == b.log, "training logs differ across identical runs");
        for (x, y) in a.params.tensors().iter().zip(b.params.tensors()) {
            ensure!(x.data() == y.data(), "final parameters differ");
        }

        // checkpoint resume reproduces the unbroken run bit-exactly
        let cp = dimension_core::checkpoint::load_checkpoint(&tmp.path().join("ckpt_epoch0002.dimc"))
            .map_err(|e| e.to_string())?;
        ensure!(cp.next_epoch == 2, "unexpected checkpoint epoch");
        opts.checkpoint_dir = None;
        opts.checkpoint_every = None;
        let resumed = fit_from(&dataset, &config, &opts, cp.params, cp.opt, cp.next_epoch).unwrap();
        for (x, y) in a.params.tensors().iter().zip(resumed.params.tensors()) {
            ensure!(x.data() == y.data(), "resumed parameters differ from unbroken run");
        }
        ensure!(
            a.log[a.log.len() - resumed.log.len()..] == resumed.log[..],
            "resumed log differs from unbroken run"
        );
        Ok(())
    })());
}
