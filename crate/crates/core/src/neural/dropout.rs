use alloc::vec::Vec;

use rand::Rng as _;

use super::tensor::Tensor;
use crate::error::{ensure, Result};
use crate::rng::{rng_from_seed, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropoutMode {
    Train,
    Eval,
}

/// Inverted-dropout multipliers: 0 for dropped elements, `1/keep_prob`
/// for survivors.
#[derive(Debug, Clone, PartialEq)]
pub struct DropoutMask {
    scale: Vec<f64>,
}

impl DropoutMask {
    pub fn sample(len: usize, keep_prob: f64, rng: &mut Rng) -> Self {
        let inv = 1.0 / keep_prob;
        let scale = if keep_prob >= 1.0 {
            alloc::vec![1.0; len]
        } else {
            (0..len)
                .map(|_| if rng.random::<f64>() < keep_prob { inv } else { 0.0 })
                .collect()
        };
        Self { scale }
    }

    pub fn identity(len: usize) -> Self {
        Self {
            scale: alloc::vec![1.0; len],
        }
    }

    pub fn scale(&self) -> &[f64] {
        &self.scale
    }

    /// Applies in place; also used for the backward pass since the mask is
    /// linear.
    pub fn apply(&self, xs: &mut [f64]) {
        for (x, s) in xs.iter_mut().zip(&self.scale) {
            *x *= s;
        }
    }
}

pub fn dropout(input: &Tensor, keep_prob: f64, mode: DropoutMode, seed: u64) -> Result<Tensor> {
    ensure!(
        keep_prob > 0.0 && keep_prob <= 1.0,
        "keep_prob must lie in (0, 1], got {keep_prob}"
    );
    let mut out = input.clone();
    if mode == DropoutMode::Train {
        DropoutMask::sample(out.len(), keep_prob, &mut rng_from_seed(seed)).apply(out.values_mut());
    }
    Ok(out)
}
