//! Feed-forward salinity network trained with Levenberg-Marquardt.
//!
//! The network maps `(moisture %, pH, temperature °C, resistivity kΩ·m)` to
//! salinity %. Inputs and target are min/max scaled to `[-1, 1]`; the hidden
//! layer uses `tanh` and the output is linear. Training follows the usual
//! damped Gauss-Newton schedule: shrink μ after a step that lowers the
//! training MSE, grow it and retry otherwise, and keep the weights from the
//! epoch with the lowest validation MSE.

use thiserror::Error;

pub mod data;
pub mod lm;
pub mod metrics;
pub mod network;
pub mod normalize;
pub mod train;

pub use data::{
    split_dataset, split_indices, synthesize_training_set, DrawPlan, Sample, SplitFractions, SplitIndices,
    SynthesisConfig,
};
pub use lm::lm_step;
pub use metrics::{error_histogram, evaluate, Evaluation, Histogram, HISTOGRAM_BINS};
pub use network::{Network, NetworkTopology};
pub use normalize::{FeatureScale, Normalizer, Transform};
pub use train::{train, train_on_split, StopReason, TrainReport, TrainingConfig};

#[derive(Debug, Error)]
pub enum AnnError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("dataset needs at least 3 samples, got {0}")]
    TooFewSamples(usize),
    #[error("calibration set has no rows at moisture level {0}%")]
    MissingLevel(f64),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("correlation undefined: zero variance in predictions or targets")]
    UndefinedCorrelation,
    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },
    #[error("I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("network format: {0}")]
    Format(#[from] serde_json::Error),
}
