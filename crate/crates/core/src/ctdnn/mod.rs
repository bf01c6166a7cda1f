//! Convolutional + time-delay network (CT-DNN) for frame-level speaker
//! features.
//!
//! Per frame, the spliced input row is read as a `time x freq` image and
//! passed through two valid convolutions (ReLU, max-pooling over frequency),
//! then flattened into a ReLU bottleneck. Across frames, two time-delay
//! layers splice bottleneck / previous outputs at fixed offsets (clamped at
//! utterance edges), apply an affine map and a P-norm. A linear feature
//! layer follows; its rows are the speaker features. A softmax over the
//! training speakers sits on top.
//!
//! Activation layout inside the conv stack is channel-last, so the
//! flattened bottleneck input of a frame is indexed `(time, freq, map)`.

mod config;
mod io;
mod net;
mod params;
mod train;

pub use config::{ConvSpec, CtDnnConfig, LayerDims, PnormSpec};
pub use io::{load_params, params_from_text, params_to_text, save_params, MODEL_HEADER};
pub use net::{batch_loss_and_grads, forward, loss_and_grads, pnorm, Forward};
pub use params::{init_params, CtDnnParams, ParamSet, Tensor, TENSOR_NAMES};
pub use train::{sgd_step, train, train_with, TrainOptions, TrainReport, Velocity};

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum NetError {
    #[error("invalid network config: {0}")]
    InvalidConfig(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("label {label} at frame {frame} is out of range for {n_speakers} speakers")]
    LabelOutOfRange { frame: usize, label: usize, n_speakers: usize },
    #[error("non-finite gradient in tensor {0}")]
    NonFiniteGradient(&'static str),
    #[error("invalid training options: {0}")]
    InvalidOptions(String),
    #[error("empty training set")]
    EmptyDataset,
    #[error("model file version mismatch: found `{0}`")]
    VersionMismatch(String),
    #[error("corrupt tensor `{name}`: {reason}")]
    CorruptTensor { name: String, reason: String },
    #[error("model file format error at line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Small network used by unit tests across the module.
#[cfg(test)]
pub(crate) fn net_test_config() -> CtDnnConfig {
    CtDnnConfig {
        input_mels: 8,
        splice: crate::frontend::SpliceSpec { left: 2, right: 2 },
        conv1: ConvSpec { maps: 2, patch_time: 2, patch_freq: 3, pool_freq: 2 },
        conv2: ConvSpec { maps: 3, patch_time: 2, patch_freq: 2, pool_freq: 1 },
        bottleneck_dim: 6,
        td1_offsets: vec![-1, 0, 1],
        td2_offsets: vec![-2, 0, 2],
        td_dim: 8,
        pnorm: PnormSpec { p: 2.0, group: 4 },
        feature_dim: 4,
        n_speakers: 3,
    }
}
