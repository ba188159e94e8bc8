use dimension_core::conv::{conv3d_backward, conv3d_forward, TemporalPad};
use dimension_core::tensor::Tensor;
use std::time::Instant;

fn main() {
    let input = Tensor::from_data(&[16, 6, 64, 64], (0..16 * 6 * 64 * 64).map(|i| (i % 7) as f64).collect()).unwrap();
    let weight = Tensor::from_data(&[16, 16, 3, 3, 3], (0..16 * 16 * 27).map(|i| (i % 5) as f64 * 0.1).collect()).unwrap();
    let bias = Tensor::zeros(&[16]);
    let gout = input.clone();

    let t = Instant::now();
    let reps = 10;
    for _ in 0..reps {
        let out = conv3d_forward(&input, &weight, &bias, TemporalPad::Zero).unwrap();
        std::hint::black_box(out);
    }
    let fwd = t.elapsed().as_secs_f64() / reps as f64;
    let macs = 16.0 * 16.0 * 27.0 * (64 * 64 * 6) as f64;
    println!("forward: {:.1} ms  ({:.2} GMAC/s)", fwd * 1e3, macs / fwd / 1e9);

    let t = Instant::now();
    for _ in 0..reps {
        let g = conv3d_backward(&input, &weight, &bias, &gout, TemporalPad::Zero).unwrap();
        std::hint::black_box(g);
    }
    let bwd = t.elapsed().as_secs_f64() / reps as f64;
    println!("backward: {:.1} ms ({:.2} GMAC/s eq)", bwd * 1e3, 2.0 * macs / bwd / 1e9);
}
