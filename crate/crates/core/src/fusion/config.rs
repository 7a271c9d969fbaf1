use alloc::vec;
use alloc::vec::Vec;

use crate::error::{ensure, Result};
use crate::neural::{AdamConfig, LossKind};

/// Architecture and training schedule of the fusion network.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct FusionConfig {
    /// Window length G.
    pub window: usize,
    /// Moving-average width H of the smoothed channel.
    pub smooth_width: usize,
    pub conv_kernel: usize,
    pub conv_channels: usize,
    pub branch_lstm_layers: usize,
    pub branch_hidden: usize,
    pub fusion_hidden_1: usize,
    pub fusion_hidden_2: usize,
    pub dense_widths: Vec<usize>,
    pub keep_prob: f64,
    pub loss: LossKind,
    pub epochs: usize,
    pub batch: usize,
    pub learning_rate: f64,
    /// Per-branch reliability multipliers applied before concatenation.
    pub sensor_weights: [f64; 3],
    pub seed: u64,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self::for_window(64)
    }
}

impl FusionConfig {
    /// Defaults scaled to the window: fusion LSTMs of 3G and 2G, dense
    /// widths 2G, G, G/2.
    pub fn for_window(g: usize) -> Self {
        Self {
            window: g,
            smooth_width: 5,
            conv_kernel: 3,
            conv_channels: 16,
            branch_lstm_layers: 3,
            branch_hidden: g,
            fusion_hidden_1: 3 * g,
            fusion_hidden_2: 2 * g,
            dense_widths: vec![2 * g, g, g / 2],
            keep_prob: 0.8,
            loss: LossKind::WeightedBce,
            epochs: 20,
            batch: 16,
            learning_rate: 1e-3,
            sensor_weights: [1.0; 3],
            seed: 0,
        }
    }

    /// The configuration used for the single-variable experiments: dense
    /// 64-32-16 with a squared-error objective.
    pub fn paper_exp() -> Self {
        Self {
            dense_widths: vec![64, 32, 16],
            loss: LossKind::Mse,
            ..Self::for_window(64)
        }
    }

    /// A reduced network that trains the standard scenario in seconds on
    /// one core while keeping the full topology.
    pub fn desk() -> Self {
        Self {
            conv_channels: 8,
            branch_lstm_layers: 1,
            branch_hidden: 8,
            fusion_hidden_1: 16,
            fusion_hidden_2: 12,
            dense_widths: vec![8, 4],
            learning_rate: 3e-3,
            ..Self::for_window(64)
        }
    }

    /// Looks up a named preset.
    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "default" => Some(Self::default()),
            "paper-exp" => Some(Self::paper_exp()),
            "desk" => Some(Self::desk()),
            _ => None,
        }
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            ..AdamConfig::default()
        }
    }

    /// Time steps leaving each branch convolution.
    pub fn steps(&self) -> usize {
        self.window + 1 - self.conv_kernel
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(
            (8..=1024).contains(&self.window),
            "window: G = {} must lie in [8, 1024]",
            self.window
        );
        ensure!(
            self.smooth_width >= 1 && self.smooth_width % 2 == 1,
            "smooth_width: H = {} must be odd and at least 1",
            self.smooth_width
        );
        ensure!(
            self.conv_kernel % 2 == 1 && self.conv_kernel <= self.window,
            "conv_kernel: K = {} must be odd and at most G = {}",
            self.conv_kernel,
            self.window
        );
        ensure!(self.conv_channels >= 1, "conv_channels must be at least 1");
        ensure!(
            self.branch_lstm_layers >= 1 && self.branch_hidden >= 1,
            "branch LSTM: layers {} and hidden {} must be at least 1",
            self.branch_lstm_layers,
            self.branch_hidden
        );
        ensure!(
            self.fusion_hidden_1 >= 1 && self.fusion_hidden_2 >= 1,
            "fusion LSTM: hidden sizes {} and {} must be at least 1",
            self.fusion_hidden_1,
            self.fusion_hidden_2
        );
        ensure!(
            self.dense_widths.iter().all(|&w| w >= 1),
            "dense_widths: every width must be at least 1, got {:?}",
            self.dense_widths
        );
        ensure!(
            self.dense_widths.windows(2).all(|w| w[0] > w[1]),
            "dense_widths: {:?} must be strictly decreasing",
            self.dense_widths
        );
        ensure!(
            self.keep_prob > 0.0 && self.keep_prob <= 1.0,
            "keep_prob: {} must lie in (0, 1]",
            self.keep_prob
        );
        ensure!(
            self.epochs >= 1 && self.batch >= 1,
            "epochs {} and batch {} must be at least 1",
            self.epochs,
            self.batch
        );
        ensure!(
            self.sensor_weights.iter().all(|w| (0.0..=1.0).contains(w)),
            "sensor_weights: {:?} must lie in [0, 1]",
            self.sensor_weights
        );
        self.adam().validate()
    }
}
