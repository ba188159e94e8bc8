//! 3D cross-correlation with zero "same" padding, stride 1, plus the exact
//! reverse-mode kernels (input, weight and bias gradients).
//!
//! Layout: input (c_in, nx, ny, nt), weight (c_out, c_in, kx, ky, kt),
//! bias (c_out), output (c_out, nx, ny, nt). Kernel dims must be odd.
//!
//! The hot loops fuse the taps along the last (contiguous) axis into small
//! stencil kernels applied to whole rows, with a fast path for the ubiquitous
//! 3-tap case. The backward pass computes the input and weight gradients in
//! a single fused sweep over the same index structure as the forward pass.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Padding along the frame (temporal) axis, which is the first spatial axis
/// of the tensors this crate feeds through the convolution. The two in-plane
/// axes always use zero padding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TemporalPad {
    Zero,
    Circular,
}

#[derive(Debug, Clone, Copy)]
struct Dims {
    c_in: usize,
    c_out: usize,
    nx: usize,
    ny: usize,
    nt: usize,
    kx: usize,
    ky: usize,
    kt: usize,
}

fn check_dims(input: &Tensor, weight: &Tensor, bias: &Tensor) -> Result<Dims> {
    let is = input.shape();
    let ws = weight.shape();
    if is.len() != 4 || ws.len() != 5 {
        return Err(Error::ShapeMismatch {
            context: "conv3d",
            expected: "input 4D (c,x,y,t), weight 5D (co,ci,kx,ky,kt)".into(),
            got: format!("input {is:?}, weight {ws:?}"),
        });
    }
    if ws[1] != is[0] {
        return Err(Error::ShapeMismatch {
            context: "conv3d",
            expected: format!("weight in_ch == input channels ({})", is[0]),
            got: format!("{}", ws[1]),
        });
    }
    if bias.shape() != [ws[0]] {
        return Err(Error::ShapeMismatch {
            context: "conv3d",
            expected: format!("bias shape [{}]", ws[0]),
            got: format!("{:?}", bias.shape()),
        });
    }
    if ws[2] % 2 == 0 || ws[3] % 2 == 0 || ws[4] % 2 == 0 {
        return Err(Error::Config(format!(
            "kernel dims must be odd, got {:?}",
            &ws[2..]
        )));
    }
    Ok(Dims {
        c_in: is[0],
        c_out: ws[0],
        nx: is[1],
        ny: is[2],
        nt: is[3],
        kx: ws[2],
        ky: ws[3],
        kt: ws[4],
    })
}

#[inline(always)]
fn resolve_frame(i: isize, n: usize, pad: TemporalPad) -> Option<usize> {
    match pad {
        TemporalPad::Zero => {
            if i < 0 || i >= n as isize {
                None
            } else {
                Some(i as usize)
            }
        }
        TemporalPad::Circular => Some(i.rem_euclid(n as isize) as usize),
    }
}

/// out_row[t] += sum_k taps[k] * in_row[t + k - kt/2], zero outside the row.
#[inline(always)]
fn stencil_accum(out_row: &mut [f64], in_row: &[f64], taps: &[f64]) {
    let nt = out_row.len();
    if taps.len() == 3 {
        if nt == 1 {
            out_row[0] += taps[1] * in_row[0];
        } else {
            stencil3_accum(out_row, in_row, taps[0], taps[1], taps[2]);
        }
        return;
    }
    let ct = (taps.len() / 2) as isize;
    for (k, &wv) in taps.iter().enumerate() {
        let dt = k as isize - ct;
        let t0 = (-dt).max(0) as usize;
        let t1 = ((nt as isize - dt).min(nt as isize)) as usize;
        for t in t0..t1 {
            out_row[t] += wv * in_row[(t as isize + dt) as usize];
        }
    }
}

#[inline(always)]
fn stencil3_accum(out_row: &mut [f64], in_row: &[f64], w0: f64, w1: f64, w2: f64) {
    let nt = out_row.len();
    out_row[0] += w1 * in_row[0] + w2 * in_row[1];
    for (o, win) in out_row[1..nt - 1].iter_mut().zip(in_row.windows(3)) {
        *o += w0 * win[0] + w1 * win[1] + w2 * win[2];
    }
    out_row[nt - 1] += w0 * in_row[nt - 2] + w1 * in_row[nt - 1];
}

/// gw[k] += sum_t g_row[t] * in_row[t + k - kt/2], zero outside the row.
#[inline(always)]
fn stencil_dot(gw: &mut [f64], g_row: &[f64], in_row: &[f64]) {
    let nt = g_row.len();
    if gw.len() == 3 {
        if nt == 1 {
            gw[1] += g_row[0] * in_row[0];
        } else {
            stencil3_dot(gw, g_row, in_row);
        }
        return;
    }
    let ct = (gw.len() / 2) as isize;
    for (k, gwk) in gw.iter_mut().enumerate() {
        let dt = k as isize - ct;
        let t0 = (-dt).max(0) as usize;
        let t1 = ((nt as isize - dt).min(nt as isize)) as usize;
        let mut s = 0.0;
        for t in t0..t1 {
            s += g_row[t] * in_row[(t as isize + dt) as usize];
        }
        *gwk += s;
    }
}

#[inline(always)]
fn stencil3_dot(gw: &mut [f64], g_row: &[f64], in_row: &[f64]) {
    let nt = g_row.len();
    let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
    for (g, win) in g_row[1..nt - 1].iter().zip(in_row.windows(3)) {
        s0 += g * win[0];
        s1 += g * win[1];
        s2 += g * win[2];
    }
    s1 += g_row[0] * in_row[0] + g_row[nt - 1] * in_row[nt - 1];
    s2 += g_row[0] * in_row[1];
    s0 += g_row[nt - 1] * in_row[nt - 2];
    gw[0] += s0;
    gw[1] += s1;
    gw[2] += s2;
}

/// Fused per-row backward for 3 temporal taps: accumulates the input gradient
/// (reversed taps applied to the output gradient) and the weight-tap gradient
/// (dot of the output gradient with shifted input) in one pass.
#[inline(always)]
fn stencil3_dual(gi_row: &mut [f64], g_row: &[f64], in_row: &[f64], rev: &[f64], gw: &mut [f64]) {
    let nt = g_row.len();
    let (r0, r1, r2) = (rev[0], rev[1], rev[2]);
    gi_row[0] += r1 * g_row[0] + r2 * g_row[1];
    gi_row[nt - 1] += r0 * g_row[nt - 2] + r1 * g_row[nt - 1];
    let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
    for t in 1..nt - 1 {
        let g = g_row[t];
        gi_row[t] += r0 * g_row[t - 1] + r1 * g + r2 * g_row[t + 1];
        s0 += g * in_row[t - 1];
        s1 += g * in_row[t];
        s2 += g * in_row[t + 1];
    }
    s0 += g_row[nt - 1] * in_row[nt - 2];
    s1 += g_row[0] * in_row[0] + g_row[nt - 1] * in_row[nt - 1];
    s2 += g_row[0] * in_row[1];
    gw[0] += s0;
    gw[1] += s1;
    gw[2] += s2;
}

/// Per-row input and weight gradient accumulation; `rev` holds the temporal
/// taps in reversed order.
#[inline(always)]
fn stencil_dual(gi_row: &mut [f64], g_row: &[f64], in_row: &[f64], rev: &[f64], gw: &mut [f64]) {
    if rev.len() == 3 && g_row.len() >= 2 {
        stencil3_dual(gi_row, g_row, in_row, rev, gw);
    } else {
        stencil_accum(gi_row, g_row, rev);
        stencil_dot(gw, g_row, in_row);
    }
}

pub fn conv3d_forward(
    input: &Tensor,
    weight: &Tensor,
    bias: &Tensor,
    pad: TemporalPad,
) -> Result<Tensor> {
    let d = check_dims(input, weight, bias)?;
    let vol = d.nx * d.ny * d.nt;
    let plane = d.ny * d.nt;
    let (cx, cy) = ((d.kx / 2) as isize, (d.ky / 2) as isize);
    let ktaps = d.ky * d.kt;
    let mut out = Tensor::zeros(&[d.c_out, d.nx, d.ny, d.nt]);

    let w = weight.data();
    let inp = input.data();
    let o = out.data_mut();
    for co in 0..d.c_out {
        let o_ch = &mut o[co * vol..(co + 1) * vol];
        o_ch.fill(bias.data()[co]);
        for ci in 0..d.c_in {
            let w_cc = &w[(co * d.c_in + ci) * d.kx * ktaps..][..d.kx * ktaps];
            let in_ch = &inp[ci * vol..(ci + 1) * vol];
            for ox in 0..d.nx {
                for kxi in 0..d.kx {
                    let Some(ix) = resolve_frame(ox as isize + kxi as isize - cx, d.nx, pad)
                    else {
                        continue;
                    };
                    let w_k = &w_cc[kxi * ktaps..][..ktaps];
                    let in_plane = &in_ch[ix * plane..][..plane];
                    for oy in 0..d.ny {
                        let out_row = &mut o_ch[ox * plane + oy * d.nt..][..d.nt];
                        for kyi in 0..d.ky {
                            let iy = oy as isize + kyi as isize - cy;
                            if iy < 0 || iy >= d.ny as isize {
                                continue;
                            }
                            let in_row = &in_plane[iy as usize * d.nt..][..d.nt];
                            stencil_accum(out_row, in_row, &w_k[kyi * d.kt..][..d.kt]);
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Gradients of the convolution w.r.t. input, weight and bias given the
/// upstream gradient of the output.
pub fn conv3d_backward(
    input: &Tensor,
    weight: &Tensor,
    bias: &Tensor,
    grad_out: &Tensor,
    pad: TemporalPad,
) -> Result<(Tensor, Tensor, Tensor)> {
    let d = check_dims(input, weight, bias)?;
    debug_assert_eq!(grad_out.shape(), [d.c_out, d.nx, d.ny, d.nt]);
    let vol = d.nx * d.ny * d.nt;
    let plane = d.ny * d.nt;
    let (cx, cy) = ((d.kx / 2) as isize, (d.ky / 2) as isize);
    let ktaps = d.ky * d.kt;
    let ctaps = d.kx * ktaps;

    let w = weight.data();
    let inp = input.data();
    let g = grad_out.data();

    let mut grad_bias = Tensor::zeros(&[d.c_out]);
    for co in 0..d.c_out {
        grad_bias.data_mut()[co] = g[co * vol..(co + 1) * vol].iter().sum();
    }

    let mut grad_in = Tensor::zeros(&[d.c_in, d.nx, d.ny, d.nt]);
    let mut grad_w = Tensor::zeros(&[d.c_out, d.c_in, d.kx, d.ky, d.kt]);
    {
        let gi = grad_in.data_mut();
        let gw = grad_w.data_mut();
        let mut w_rev = vec![0.0f64; ctaps];
        for co in 0..d.c_out {
            let g_ch = &g[co * vol..(co + 1) * vol];
            for ci in 0..d.c_in {
                let w_cc = &w[(co * d.c_in + ci) * ctaps..][..ctaps];
                for pair in 0..d.kx * d.ky {
                    for k in 0..d.kt {
                        w_rev[pair * d.kt + k] = w_cc[pair * d.kt + d.kt - 1 - k];
                    }
                }
                let gw_cc = &mut gw[(co * d.c_in + ci) * ctaps..][..ctaps];
                let in_ch = &inp[ci * vol..(ci + 1) * vol];
                let gi_ch = &mut gi[ci * vol..(ci + 1) * vol];
                for ox in 0..d.nx {
                    for kxi in 0..d.kx {
                        let Some(ix) = resolve_frame(ox as isize + kxi as isize - cx, d.nx, pad)
                        else {
                            continue;
                        };
                        for oy in 0..d.ny {
                            let g_row = &g_ch[ox * plane + oy * d.nt..][..d.nt];
                            for kyi in 0..d.ky {
                                let iy = oy as isize + kyi as isize - cy;
                                if iy < 0 || iy >= d.ny as isize {
                                    continue;
                                }
                                let base = ix * plane + iy as usize * d.nt;
                                let pair = kxi * d.ky + kyi;
                                stencil_dual(
                                    &mut gi_ch[base..base + d.nt],
                                    g_row,
                                    &in_ch[base..base + d.nt],
                                    &w_rev[pair * d.kt..][..d.kt],
                                    &mut gw_cc[pair * d.kt..][..d.kt],
                                );
                            }
                        }
                    }
                }
            }
        }
    }

    Ok((grad_in, grad_w, grad_bias))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn random_tensor(shape: &[usize], seed: u64) -> Tensor {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let n: usize = shape.iter().product();
        Tensor::from_data(shape, (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
    }

    /// Independent triple-loop reference convolution.
    fn reference_conv(input: &Tensor, weight: &Tensor, bias: &Tensor) -> Tensor {
        let (c_in, nx, ny, nt) = (
            input.shape()[0],
            input.shape()[1],
            input.shape()[2],
            input.shape()[3],
        );
        let (c_out, kx, ky, kt) = (
            weight.shape()[0],
            weight.shape()[2],
            weight.shape()[3],
            weight.shape()[4],
        );
        let mut out = Tensor::zeros(&[c_out, nx, ny, nt]);
        let at_in = |c: usize, x: isize, y: isize, t: isize| -> f64 {
            if x < 0 || y < 0 || t < 0 || x >= nx as isize || y >= ny as isize || t >= nt as isize
            {
                0.0
            } else {
                input.data()
                    [((c * nx + x as usize) * ny + y as usize) * nt + t as usize]
            }
        };
        for co in 0..c_out {
            for x in 0..nx {
                for y in 0..ny {
                    for t in 0..nt {
                        let mut acc = bias.data()[co];
                        for ci in 0..c_in {
                            for a in 0..kx {
                                for b in 0..ky {
                                    for c in 0..kt {
                                        let wv = weight.data()[((((co * c_in + ci) * kx + a)
                                            * ky
                                            + b)
                                            * kt)
                                            + c];
                                        acc += wv
                                            * at_in(
                                                ci,
                                                x as isize + a as isize - (kx / 2) as isize,
                                                y as isize + b as isize - (ky / 2) as isize,
                                                t as isize + c as isize - (kt / 2) as isize,
                                            );
                                    }
                                }
                            }
                        }
                        out.data_mut()[((co * nx + x) * ny + y) * nt + t] = acc;
                    }
                }
            }
        }
        out
    }

    #[test]
    fn identity_kernel_passes_input_through() {
        let input = random_tensor(&[1, 4, 5, 3], 1);
        let mut weight = Tensor::zeros(&[1, 1, 3, 3, 3]);
        weight.data_mut()[13] = 1.0; // kernel center
        let bias = Tensor::zeros(&[1]);
        let out = conv3d_forward(&input, &weight, &bias, TemporalPad::Zero).unwrap();
        assert_eq!(out.data(), input.data());
    }

    #[test]
    fn all_ones_kernel_sums_neighborhood() {
        // constant-1 volume, interior voxel sees all 27 neighbors
        let input = Tensor::from_data(&[1, 5, 5, 5], vec![1.0; 125]).unwrap();
        let weight = Tensor::from_data(&[1, 1, 3, 3, 3], vec![1.0; 27]).unwrap();
        let bias = Tensor::from_data(&[1], vec![0.5]).unwrap();
        let out = conv3d_forward(&input, &weight, &bias, TemporalPad::Zero).unwrap();
        let center = out.data()[(2 * 5 + 2) * 5 + 2];
        assert!((center - 27.5).abs() < 1e-12);
    }

    #[test]
    fn matches_brute_force_reference() {
        let input = random_tensor(&[1, 5, 5, 3], 10);
        let weight = random_tensor(&[1, 1, 3, 3, 3], 11);
        let bias = random_tensor(&[1], 12);
        let fast = conv3d_forward(&input, &weight, &bias, TemporalPad::Zero).unwrap();
        let slow = reference_conv(&input, &weight, &bias);
        let max: f64 = fast
            .data()
            .iter()
            .zip(slow.data())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(max < 1e-12, "max diff {max}");
    }

    #[test]
    fn matches_reference_multichannel() {
        let input = random_tensor(&[3, 4, 6, 2], 20);
        let weight = random_tensor(&[2, 3, 3, 3, 3], 21);
        let bias = random_tensor(&[2], 22);
        let fast = conv3d_forward(&input, &weight, &bias, TemporalPad::Zero).unwrap();
        let slow = reference_conv(&input, &weight, &bias);
        let max: f64 = fast
            .data()
            .iter()
            .zip(slow.data())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(max < 1e-12, "max diff {max}");
    }

    /// Independent reference with circular wrap on the first spatial axis.
    fn reference_conv_circular(input: &Tensor, weight: &Tensor, bias: &Tensor) -> Tensor {
        let (c_in, nx, ny, nt) = (
            input.shape()[0],
            input.shape()[1],
            input.shape()[2],
            input.shape()[3],
        );
        let (c_out, kx, ky, kt) = (
            weight.shape()[0],
            weight.shape()[2],
            weight.shape()[3],
            weight.shape()[4],
        );
        let mut out = Tensor::zeros(&[c_out, nx, ny, nt]);
        let at_in = |c: usize, x: isize, y: isize, t: isize| -> f64 {
            if y < 0 || t < 0 || y >= ny as isize || t >= nt as isize {
                return 0.0;
            }
            let xw = x.rem_euclid(nx as isize) as usize;
            input.data()[((c * nx + xw) * ny + y as usize) * nt + t as usize]
        };
        for co in 0..c_out {
            for x in 0..nx {
                for y in 0..ny {
                    for t in 0..nt {
                        let mut acc = bias.data()[co];
                        for ci in 0..c_in {
                            for a in 0..kx {
                                for b in 0..ky {
                                    for c in 0..kt {
                                        let wv = weight.data()[((((co * c_in + ci) * kx + a)
                                            * ky
                                            + b)
                                            * kt)
                                            + c];
                                        acc += wv
                                            * at_in(
                                                ci,
                                                x as isize + a as isize - (kx / 2) as isize,
                                                y as isize + b as isize - (ky / 2) as isize,
                                                t as isize + c as isize - (kt / 2) as isize,
                                            );
                                    }
                                }
                            }
                        }
                        out.data_mut()[((co * nx + x) * ny + y) * nt + t] = acc;
                    }
                }
            }
        }
        out
    }

    #[test]
    fn circular_frame_padding_matches_reference() {
        let input = random_tensor(&[2, 3, 5, 4], 40);
        let weight = random_tensor(&[2, 2, 3, 3, 3], 41);
        let bias = random_tensor(&[2], 42);
        let fast = conv3d_forward(&input, &weight, &bias, TemporalPad::Circular).unwrap();
        let slow = reference_conv_circular(&input, &weight, &bias);
        let max: f64 = fast
            .data()
            .iter()
            .zip(slow.data())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(max < 1e-12, "max diff {max}");
    }

    #[test]
    fn circular_backward_matches_finite_differences() {
        let input = random_tensor(&[2, 3, 4, 3], 50);
        let weight = random_tensor(&[2, 2, 3, 3, 3], 51);
        let bias = random_tensor(&[2], 52);
        let gout = random_tensor(&[2, 3, 4, 3], 53);

        let (gi, gw, gb) =
            conv3d_backward(&input, &weight, &bias, &gout, TemporalPad::Circular).unwrap();
        let f = |inp: &Tensor, w: &Tensor, b: &Tensor| -> f64 {
            conv3d_forward(inp, w, b, TemporalPad::Circular)
                .unwrap()
                .data()
                .iter()
                .zip(gout.data())
                .map(|(a, g)| a * g)
                .sum()
        };
        let h = 1e-6;
        for (tensor, grad, which) in [(&input, &gi, 0), (&weight, &gw, 1), (&bias, &gb, 2)] {
            for i in (0..tensor.numel()).step_by((tensor.numel() / 7).max(1)) {
                let mut plus = tensor.clone();
                plus.data_mut()[i] += h;
                let mut minus = tensor.clone();
                minus.data_mut()[i] -= h;
                let fd = match which {
                    0 => (f(&plus, &weight, &bias) - f(&minus, &weight, &bias)) / (2.0 * h),
                    1 => (f(&input, &plus, &bias) - f(&input, &minus, &bias)) / (2.0 * h),
                    _ => (f(&input, &weight, &plus) - f(&input, &weight, &minus)) / (2.0 * h),
                };
                let g = grad.data()[i];
                let rel = (fd - g).abs() / g.abs().max(1e-8);
                assert!(rel < 1e-6, "which={which} i={i} fd={fd} g={g}");
            }
        }
    }

    #[test]
    fn channel_mismatch_is_error() {
        let input = random_tensor(&[2, 4, 4, 2], 0);
        let weight = random_tensor(&[1, 3, 3, 3, 3], 1);
        let bias = Tensor::zeros(&[1]);
        assert!(conv3d_forward(&input, &weight, &bias, TemporalPad::Zero).is_err());
    }

    #[test]
    fn backward_matches_finite_differences() {
        let input = random_tensor(&[2, 4, 4, 3], 30);
        let weight = random_tensor(&[2, 2, 3, 3, 3], 31);
        let bias = random_tensor(&[2], 32);
        let gout = random_tensor(&[2, 4, 4, 3], 33);

        let (gi, gw, gb) = conv3d_backward(&input, &weight, &bias, &gout, TemporalPad::Zero).unwrap();
        // scalar objective: <conv(input), gout>
        let f = |inp: &Tensor, w: &Tensor, b: &Tensor| -> f64 {
            conv3d_forward(inp, w, b, TemporalPad::Zero)
                .unwrap()
                .data()
                .iter()
                .zip(gout.data())
                .map(|(a, g)| a * g)
                .sum()
        };
        let h = 1e-6;
        for (tensor, grad, which) in [(&input, &gi, 0), (&weight, &gw, 1), (&bias, &gb, 2)] {
            // probe a handful of entries
            for i in (0..tensor.numel()).step_by((tensor.numel() / 7).max(1)) {
                let mut plus = tensor.clone();
                plus.data_mut()[i] += h;
                let mut minus = tensor.clone();
                minus.data_mut()[i] -= h;
                let fd = match which {
                    0 => (f(&plus, &weight, &bias) - f(&minus, &weight, &bias)) / (2.0 * h),
                    1 => (f(&input, &plus, &bias) - f(&input, &minus, &bias)) / (2.0 * h),
                    _ => (f(&input, &weight, &plus) - f(&input, &weight, &minus)) / (2.0 * h),
                };
                let g = grad.data()[i];
                let rel = (fd - g).abs() / g.abs().max(1e-8);
                assert!(rel < 1e-6, "which={which} i={i} fd={fd} g={g}");
            }
        }
    }

    #[test]
    fn backward_matches_finite_differences_single_frame_row() {
        // nt == 1 exercises the degenerate-row stencil paths
        let input = random_tensor(&[2, 3, 4, 1], 60);
        let weight = random_tensor(&[2, 2, 3, 3, 3], 61);
        let bias = random_tensor(&[2], 62);
        let gout = random_tensor(&[2, 3, 4, 1], 63);

        let (gi, gw, gb) = conv3d_backward(&input, &weight, &bias, &gout, TemporalPad::Zero).unwrap();
        let f = |inp: &Tensor, w: &Tensor, b: &Tensor| -> f64 {
            conv3d_forward(inp, w, b, TemporalPad::Zero)
                .unwrap()
                .data()
                .iter()
                .zip(gout.data())
                .map(|(a, g)| a * g)
                .sum()
        };
        let h = 1e-6;
        for (tensor, grad, which) in [(&input, &gi, 0), (&weight, &gw, 1), (&bias, &gb, 2)] {
            for i in (0..tensor.numel()).step_by((tensor.numel() / 7).max(1)) {
                let mut plus = tensor.clone();
                plus.data_mut()[i] += h;
                let mut minus = tensor.clone();
                minus.data_mut()[i] -= h;
                let fd = match which {
                    0 => (f(&plus, &weight, &bias) - f(&minus, &weight, &bias)) / (2.0 * h),
                    1 => (f(&input, &plus, &bias) - f(&input, &minus, &bias)) / (2.0 * h),
                    _ => (f(&input, &weight, &plus) - f(&input, &weight, &minus)) / (2.0 * h),
                };
                let g = grad.data()[i];
                let rel = (fd - g).abs() / g.abs().max(1e-8);
                assert!(rel < 1e-6, "which={which} i={i} fd={fd} g={g}");
            }
        }
    }
}
