use alloc::vec;
use alloc::vec::Vec;

use super::model::LayerSpec;
use crate::error::Result;
use crate::math::{axpy, dot, sqrt};
use crate::rng::{uniform_symmetric, Rng};

/// Fully connected layer, parameters `[W (out × in) | b (out)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    in_width: usize,
    out_width: usize,
    params: Vec<f64>,
}

impl Dense {
    pub fn zeros(in_width: usize, out_width: usize) -> Result<Self> {
        LayerSpec::Dense { in_width, out_width }.validate()?;
        Ok(Self {
            in_width,
            out_width,
            params: vec![0.0; out_width * (in_width + 1)],
        })
    }

    pub fn init(in_width: usize, out_width: usize, rng: &mut Rng) -> Result<Self> {
        let mut layer = Self::zeros(in_width, out_width)?;
        let bound = 1.0 / sqrt(in_width as f64);
        for p in &mut layer.params {
            *p = uniform_symmetric(rng, bound);
        }
        Ok(layer)
    }

    pub fn spec(&self) -> LayerSpec {
        LayerSpec::Dense {
            in_width: self.in_width,
            out_width: self.out_width,
        }
    }

    pub fn in_width(&self) -> usize {
        self.in_width
    }

    pub fn out_width(&self) -> usize {
        self.out_width
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let wl = self.in_width * self.out_width;
        let (w, b) = self.params.split_at(wl);
        w.chunks_exact(self.in_width)
            .zip(b)
            .map(|(row, bias)| dot(row, x) + bias)
            .collect()
    }

    pub fn backward(&self, x: &[f64], grad_out: &[f64], grad_params: &mut [f64]) -> Vec<f64> {
        let wl = self.in_width * self.out_width;
        let mut grad_in = vec![0.0; self.in_width];
        let (gw, gb) = grad_params.split_at_mut(wl);
        for (o, &g) in grad_out.iter().enumerate() {
            gb[o] += g;
            let range = o * self.in_width..(o + 1) * self.in_width;
            axpy(g, x, &mut gw[range.clone()]);
            axpy(g, &self.params[range], &mut grad_in);
        }
        grad_in
    }
}
