//! Named model presets covering the ablation matrix: the image-domain-only
//! D5C5 baseline, the cross-domain cascade with and without the k-space and
//! spatial loss terms, and the two spatial-loss weight schedules.

use crate::conv::TemporalPad;
use crate::error::{Error, Result};
use crate::model::ModelConfig;
use crate::tape::DcWeight;

pub const PRESET_NAMES: &[&str] = &[
    "d5c5",
    "model1",
    "model2",
    "model3",
    "dimension",
    "dimension-sloss2",
];

pub fn preset(name: &str) -> Result<ModelConfig> {
    let base = ModelConfig {
        m_blocks: 1,
        n_blocks: 4,
        layers_per_block: 5,
        filters: 64,
        kernel: (3, 3, 3),
        dc_lambda: DcWeight::Infinite,
        temporal_pad: TemporalPad::Zero,
        loss_alpha: vec![0.0],
        loss_beta: vec![0.0; 3],
    };
    let config = match name {
        // five spatial blocks, no frequency-domain stage, primary loss only
        "d5c5" => ModelConfig {
            m_blocks: 0,
            n_blocks: 5,
            loss_alpha: vec![],
            loss_beta: vec![0.0; 4],
            ..base
        },
        // cross-domain cascade, primary loss only
        "model1" => base,
        // + k-space loss
        "model2" => ModelConfig {
            loss_alpha: vec![0.1],
            ..base
        },
        // + spatial loss
        "model3" => ModelConfig {
            loss_beta: vec![1e3, 1e3, 1e3],
            ..base
        },
        // all three loss terms
        "dimension" => ModelConfig {
            loss_alpha: vec![0.1],
            loss_beta: vec![1e3, 1e3, 1e3],
            ..base
        },
        // decreasing spatial weight schedule
        "dimension-sloss2" => ModelConfig {
            loss_alpha: vec![0.1],
            loss_beta: vec![1e5, 1e4, 1e3],
            ..base
        },
        other => {
            return Err(Error::Config(format!(
                "unknown preset '{other}'; available: {}",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    config.validate()?;
    Ok(config)
}
