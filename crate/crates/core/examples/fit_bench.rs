use std::time::Instant;
use dimension_core::conv::TemporalPad;
use dimension_core::dataset::{Dataset, DatasetSpec};
use dimension_core::model::ModelConfig;
use dimension_core::phantom::PhantomSpec;
use dimension_core::tape::DcWeight;
use dimension_core::train::{fit, TrainOptions};

fn main() {
    let config = ModelConfig {
        m_blocks: 1, n_blocks: 4, layers_per_block: 3, filters: 16,
        kernel: (3, 3, 3), dc_lambda: DcWeight::Infinite, temporal_pad: TemporalPad::Zero,
        loss_alpha: vec![0.1], loss_beta: vec![1e3; 3],
    };
    let spec = DatasetSpec {
        phantom: PhantomSpec { seed: 6, ..PhantomSpec::default() },
        count: 50, train_frac: 0.9, accel: 4.0, acs: 4,
        mask_sigma: None, fresh_mask_per_example: true,
    };
    let t0 = Instant::now();
    let dataset = Dataset::generate(&spec).unwrap();
    println!("gen: {:.1}s", t0.elapsed().as_secs_f64());
    let t1 = Instant::now();
    let opts = TrainOptions { epochs: 2, batch_size: 2, lr0: 1e-3, decay: 0.95, seed: 6, checkpoint_every: None, checkpoint_dir: None };
    let r = fit(&dataset, &config, &opts).unwrap();
    println!("2 epochs: {:.1}s ({} steps)", t1.elapsed().as_secs_f64(), r.log.len());
}
