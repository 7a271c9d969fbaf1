use alloc::vec;
use alloc::vec::Vec;

use super::model::LayerSpec;
use super::tensor::Tensor;
use crate::error::{ensure, Result};
use crate::math::{axpy, dot, sqrt};
use crate::rng::{uniform_symmetric, Rng};

/// Valid-mode 1-D convolution without kernel flip.
///
/// Parameters are stored as `[weights (out × in × k) | bias (out)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Conv1d {
    in_channels: usize,
    out_channels: usize,
    kernel_size: usize,
    params: Vec<f64>,
}

impl Conv1d {
    pub fn zeros(in_channels: usize, out_channels: usize, kernel_size: usize) -> Result<Self> {
        LayerSpec::Conv1d {
            in_channels,
            out_channels,
            kernel_size,
        }
        .validate()?;
        Ok(Self {
            in_channels,
            out_channels,
            kernel_size,
            params: vec![0.0; out_channels * (in_channels * kernel_size + 1)],
        })
    }

    /// Uniform in `±1/√(in·k)`.
    pub fn init(in_channels: usize, out_channels: usize, kernel_size: usize, rng: &mut Rng) -> Result<Self> {
        let mut layer = Self::zeros(in_channels, out_channels, kernel_size)?;
        let bound = 1.0 / sqrt((in_channels * kernel_size) as f64);
        for p in &mut layer.params {
            *p = uniform_symmetric(rng, bound);
        }
        Ok(layer)
    }

    pub fn spec(&self) -> LayerSpec {
        LayerSpec::Conv1d {
            in_channels: self.in_channels,
            out_channels: self.out_channels,
            kernel_size: self.kernel_size,
        }
    }

    pub fn in_channels(&self) -> usize {
        self.in_channels
    }

    pub fn out_channels(&self) -> usize {
        self.out_channels
    }

    pub fn kernel_size(&self) -> usize {
        self.kernel_size
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn weight_len(&self) -> usize {
        self.out_channels * self.in_channels * self.kernel_size
    }

    pub fn weights(&self) -> &[f64] {
        &self.params[..self.weight_len()]
    }

    pub fn bias(&self) -> &[f64] {
        &self.params[self.weight_len()..]
    }

    pub fn output_len(&self, len: usize) -> Option<usize> {
        (len >= self.kernel_size).then(|| len - self.kernel_size + 1)
    }

    fn kernel(&self, o: usize, c: usize) -> &[f64] {
        let k = self.kernel_size;
        let start = (o * self.in_channels + c) * k;
        &self.params[start..start + k]
    }

    /// `input` is `in × len`; returns `out × (len − k + 1)`.
    pub fn forward(&self, input: &[f64], len: usize) -> Vec<f64> {
        debug_assert_eq!(input.len(), self.in_channels * len);
        let t_out = len + 1 - self.kernel_size;
        let bias = self.bias();
        let mut out = vec![0.0; self.out_channels * t_out];
        for (o, row) in out.chunks_exact_mut(t_out).enumerate() {
            row.fill(bias[o]);
            for c in 0..self.in_channels {
                let x = &input[c * len..(c + 1) * len];
                for (j, &w) in self.kernel(o, c).iter().enumerate() {
                    axpy(w, &x[j..j + t_out], row);
                }
            }
        }
        out
    }

    /// Accumulates parameter gradients into `grad_params` and returns the
    /// gradient with respect to `input`.
    pub fn backward(&self, input: &[f64], len: usize, grad_out: &[f64], grad_params: &mut [f64]) -> Vec<f64> {
        let k = self.kernel_size;
        let t_out = len + 1 - k;
        let wl = self.weight_len();
        let mut grad_in = vec![0.0; self.in_channels * len];
        for (o, g) in grad_out.chunks_exact(t_out).enumerate() {
            grad_params[wl + o] += g.iter().sum::<f64>();
            for c in 0..self.in_channels {
                let x = &input[c * len..(c + 1) * len];
                let gi = &mut grad_in[c * len..(c + 1) * len];
                let base = (o * self.in_channels + c) * k;
                for j in 0..k {
                    grad_params[base + j] += dot(g, &x[j..j + t_out]);
                    axpy(self.params[base + j], g, &mut gi[j..j + t_out]);
                }
            }
        }
        grad_in
    }
}

/// Functional form: `input` is `C_in × L`, `kernels` `C_out × C_in × K`,
/// `bias` `C_out`.
pub fn conv1d(input: &Tensor, kernels: &Tensor, bias: &Tensor) -> Result<Tensor> {
    ensure!(input.shape().len() == 2, "conv1d input must be C_in x L");
    ensure!(kernels.shape().len() == 3, "conv1d kernels must be C_out x C_in x K");
    let (c_in, len) = (input.shape()[0], input.shape()[1]);
    let (c_out, k_in, k) = (kernels.shape()[0], kernels.shape()[1], kernels.shape()[2]);
    ensure!(k_in == c_in, "kernel expects {k_in} input channels, input has {c_in}");
    ensure!(bias.len() == c_out, "bias has {} entries, expected {c_out}", bias.len());
    ensure!(len >= k, "input length {len} is shorter than the kernel size {k}");
    let mut layer = Conv1d::zeros(c_in, c_out, k)?;
    let wl = layer.weight_len();
    layer.params[..wl].copy_from_slice(kernels.values());
    layer.params[wl..].copy_from_slice(bias.values());
    Tensor::new(alloc::vec![c_out, len - k + 1], layer.forward(input.values(), len))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_kernel() {
        let x = Tensor::new(vec![1, 4], vec![1.0, -2.0, 3.5, 0.0]).unwrap();
        let k = Tensor::new(vec![1, 1, 1], vec![1.0]).unwrap();
        let y = conv1d(&x, &k, &Tensor::from_slice(&[0.0])).unwrap();
        assert_eq!(y.values(), x.values());
    }

    #[test]
    fn difference_kernel_no_flip() {
        let x = Tensor::new(vec![1, 4], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let k = Tensor::new(vec![1, 1, 3], vec![1.0, 0.0, -1.0]).unwrap();
        let y = conv1d(&x, &k, &Tensor::from_slice(&[0.0])).unwrap();
        assert_eq!(y.values(), &[-2.0, -2.0]);
        assert_eq!(y.shape(), &[1, 2]);
    }

    #[test]
    fn bias_only() {
        let x = Tensor::new(vec![2, 5], (0..10).map(|v| v as f64).collect()).unwrap();
        let k = Tensor::zeros(vec![3, 2, 2]);
        let y = conv1d(&x, &k, &Tensor::from_slice(&[0.5, -1.0, 2.0])).unwrap();
        assert_eq!(
            y.values(),
            &[0.5, 0.5, 0.5, 0.5, -1.0, -1.0, -1.0, -1.0, 2.0, 2.0, 2.0, 2.0]
        );
    }

    #[test]
    fn short_input_rejected() {
        let x = Tensor::new(vec![1, 2], vec![1.0, 2.0]).unwrap();
        let k = Tensor::zeros(vec![1, 1, 3]);
        assert!(conv1d(&x, &k, &Tensor::from_slice(&[0.0])).is_err());
    }
}
