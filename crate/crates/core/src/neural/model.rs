use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{ensure, Result};

/// Layer description: kind plus the sizes that fix its parameter layout.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum LayerSpec {
    Conv1d {
        in_channels: usize,
        out_channels: usize,
        kernel_size: usize,
    },
    /// One entry per stacked layer is stored in checkpoints.
    Lstm {
        input_size: usize,
        hidden_size: usize,
        num_layers: usize,
    },
    Dense {
        in_width: usize,
        out_width: usize,
    },
    Dropout {
        keep_prob: f64,
    },
    Sigmoid,
    Tanh,
    Relu,
}

impl LayerSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            LayerSpec::Conv1d {
                in_channels,
                out_channels,
                kernel_size,
            } => ensure!(
                in_channels >= 1 && out_channels >= 1 && kernel_size >= 1,
                "conv1d sizes must be at least 1"
            ),
            LayerSpec::Lstm {
                input_size,
                hidden_size,
                num_layers,
            } => ensure!(
                input_size >= 1 && hidden_size >= 1 && num_layers >= 1,
                "lstm sizes must be at least 1"
            ),
            LayerSpec::Dense { in_width, out_width } => {
                ensure!(in_width >= 1 && out_width >= 1, "dense widths must be at least 1")
            }
            LayerSpec::Dropout { keep_prob } => ensure!(
                keep_prob > 0.0 && keep_prob <= 1.0,
                "keep_prob must lie in (0, 1], got {keep_prob}"
            ),
            LayerSpec::Sigmoid | LayerSpec::Tanh | LayerSpec::Relu => {}
        }
        Ok(())
    }

    pub fn kind(&self) -> &'static str {
        match self {
            LayerSpec::Conv1d { .. } => "conv1d",
            LayerSpec::Lstm { .. } => "lstm",
            LayerSpec::Dense { .. } => "dense",
            LayerSpec::Dropout { .. } => "dropout",
            LayerSpec::Sigmoid => "sigmoid",
            LayerSpec::Tanh => "tanh",
            LayerSpec::Relu => "relu",
        }
    }
}

/// A named, contiguous block of trainable parameters.
#[derive(Debug, Clone)]
pub struct ParamBlock<'a> {
    pub name: String,
    pub spec: LayerSpec,
    pub shape: Vec<usize>,
    pub values: &'a [f64],
}

/// Anything with an ordered list of parameter blocks.
pub trait Model {
    fn blocks(&self) -> Vec<ParamBlock<'_>>;
    fn params_mut(&mut self) -> Vec<&mut [f64]>;

    fn block_sizes(&self) -> Vec<usize> {
        self.blocks().iter().map(|b| b.values.len()).collect()
    }

    fn num_params(&self) -> usize {
        self.block_sizes().iter().sum()
    }

    /// All parameters concatenated in block order.
    fn flat_params(&self) -> Vec<f64> {
        self.blocks().iter().flat_map(|b| b.values.iter().copied()).collect()
    }

    fn set_flat_params(&mut self, values: &[f64]) -> Result<()> {
        ensure!(
            values.len() == self.num_params(),
            "expected {} parameters, got {}",
            self.num_params(),
            values.len()
        );
        let mut offset = 0;
        for block in self.params_mut() {
            let n = block.len();
            block.copy_from_slice(&values[offset..offset + n]);
            offset += n;
        }
        Ok(())
    }
}

/// Gradient buffers aligned with a model's parameter blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub blocks: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(model: &(impl Model + ?Sized)) -> Self {
        Self {
            blocks: model.block_sizes().into_iter().map(|n| vec![0.0; n]).collect(),
        }
    }

    pub fn fill_zero(&mut self) {
        for b in &mut self.blocks {
            b.fill(0.0);
        }
    }

    pub fn flat(&self) -> Vec<f64> {
        self.blocks.iter().flatten().copied().collect()
    }

    pub fn is_finite(&self) -> bool {
        self.blocks.iter().all(|b| crate::math::all_finite(b))
    }

    pub fn scale(&mut self, s: f64) {
        for b in &mut self.blocks {
            for g in b.iter_mut() {
                *g *= s;
            }
        }
    }

    /// Euclidean norm over every block.
    pub fn norm(&self) -> f64 {
        crate::math::sqrt(self.blocks.iter().flatten().map(|g| g * g).sum())
    }

    /// Rescales so the global norm is at most `max_norm`; returns the norm
    /// before clipping.
    pub fn clip_norm(&mut self, max_norm: f64) -> f64 {
        let n = self.norm();
        if n > max_norm && n > 0.0 {
            self.scale(max_norm / n);
        }
        n
    }
}
