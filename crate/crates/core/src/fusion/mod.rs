//! Decision-level fusion of the three sensor probability streams.
//!
//! Each sensor's raw and smoothed window passes through its own
//! convolution and LSTM stack; the branch outputs, scaled by per-sensor
//! reliability weights, are concatenated and fed to two further LSTMs and a
//! dense head. A Dempster-Shafer combination of the raw probabilities serves
//! as the classical baseline.

mod config;
mod ds;
mod metrics;
mod network;
mod train;

pub use config::FusionConfig;
pub use ds::{
    ds_combine, ds_combine_pair, ds_score, ds_scores, probability_to_mass, MassFunction, DEFAULT_RELIABILITY,
};
pub use metrics::{classification_metrics, roc_auc, Metrics};
pub use network::{build_fusion_network, fusion_forward, FusionNetwork, FusionProbe};
pub use train::{
    evaluate, mean_loss, split_samples, train, train_split, EpochRecord, Evaluation, Prediction, TrainHistory,
    TRAIN_FRACTION,
};
