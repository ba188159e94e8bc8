//! Cross-domain cascaded reconstruction for dynamic MR: k-space and
//! image-domain convolutional blocks with data-consistency layers, trained
//! with a multi-supervised loss on synthetic cine phantoms.

pub mod binio;
pub mod checkpoint;
pub mod config;
pub mod conv;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod fft;
pub mod loss;
pub mod metrics;
pub mod model;
pub mod optim;
pub mod phantom;
pub mod presets;
pub mod report;
pub mod sampling;
pub mod tape;
pub mod tensor;
pub mod train;
pub mod volume;

pub use error::{Error, Result};
pub use model::{ForwardTrace, ModelConfig, ParameterSet};
pub use tape::DcWeight;
pub use volume::{ComplexVolume, RealVolume, TwoChannelVolume};
