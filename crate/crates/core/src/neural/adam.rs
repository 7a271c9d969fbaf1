use alloc::vec;
use alloc::vec::Vec;

use super::tensor::Tensor;
use crate::error::{ensure, Result};
use crate::math::{powi, sqrt};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        ensure!(
            self.beta1 > 0.0 && self.beta1 < 1.0 && self.beta2 > 0.0 && self.beta2 < 1.0,
            "Adam betas must lie in (0, 1)"
        );
        ensure!(self.epsilon > 0.0, "Adam epsilon must be positive");
        ensure!(
            self.learning_rate > 0.0 && self.learning_rate.is_finite(),
            "learning rate must be positive"
        );
        Ok(())
    }
}

/// Bias-corrected Adam moments for a list of parameter blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    pub step: u64,
    pub first_moment: Vec<Vec<f64>>,
    pub second_moment: Vec<Vec<f64>>,
}

impl AdamState {
    pub fn new(config: AdamConfig, block_sizes: &[usize]) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            step: 0,
            first_moment: block_sizes.iter().map(|&n| vec![0.0; n]).collect(),
            second_moment: block_sizes.iter().map(|&n| vec![0.0; n]).collect(),
        })
    }

    pub fn update(&mut self, params: &mut [&mut [f64]], grads: &[Vec<f64>]) -> Result<()> {
        ensure!(
            params.len() == self.first_moment.len() && grads.len() == params.len(),
            "Adam state tracks {} blocks, got {} parameter and {} gradient blocks",
            self.first_moment.len(),
            params.len(),
            grads.len()
        );
        for ((p, g), m) in params.iter().zip(grads).zip(&self.first_moment) {
            ensure!(
                p.len() == g.len() && p.len() == m.len(),
                "parameter, gradient and moment sizes differ"
            );
        }
        self.step += 1;
        let c = self.config;
        let bc1 = 1.0 - powi(c.beta1, self.step as i32);
        let bc2 = 1.0 - powi(c.beta2, self.step as i32);
        for (((p, g), m), v) in params
            .iter_mut()
            .zip(grads)
            .zip(&mut self.first_moment)
            .zip(&mut self.second_moment)
        {
            for i in 0..p.len() {
                m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
                v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                p[i] -= c.learning_rate * m_hat / (sqrt(v_hat) + c.epsilon);
            }
        }
        Ok(())
    }
}

/// Single-tensor Adam update.
pub fn adam_step(params: &mut Tensor, grads: &Tensor, state: &mut AdamState) -> Result<()> {
    ensure!(params.shape() == grads.shape(), "parameter and gradient shapes differ");
    let g = vec![grads.values().to_vec()];
    state.update(&mut [params.values_mut()], &g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params() {
        let mut p = Tensor::from_slice(&[1.0, -2.0]);
        let mut s = AdamState::new(AdamConfig::default(), &[2]).unwrap();
        adam_step(&mut p, &Tensor::zeros(alloc::vec![2]), &mut s).unwrap();
        assert_eq!(p.values(), &[1.0, -2.0]);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut p = Tensor::from_slice(&[0.5]);
        let mut s = AdamState::new(AdamConfig::default(), &[1]).unwrap();
        adam_step(&mut p, &Tensor::from_slice(&[1.0]), &mut s).unwrap();
        // m̂ = v̂ = 1 → Δ = lr / (1 + ε)
        assert!((0.5 - p.values()[0] - 1e-3).abs() < 1e-10);
        let before = p.values()[0];
        adam_step(&mut p, &Tensor::from_slice(&[1.0]), &mut s).unwrap();
        let second = before - p.values()[0];
        assert!((second - 1e-3).abs() < 1e-4);
    }

    #[test]
    fn invalid_betas_rejected() {
        let cfg = AdamConfig {
            beta1: 1.0,
            ..Default::default()
        };
        assert!(AdamState::new(cfg, &[1]).is_err());
    }
}
