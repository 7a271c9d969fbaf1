//! Central finite-difference verification of hand-derived gradients.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::activation::Activation;
use super::conv::Conv1d;
use super::dense::Dense;
use super::loss::bce_term;
use super::lstm::Lstm;
use crate::error::{ensure, Error, Result};
use crate::math::{abs, dot};
use crate::rng::{uniform_symmetric, Rng};

/// A scalar function of a flat coordinate vector (parameters followed by
/// inputs) with an analytic gradient.
pub trait Differentiable {
    fn coordinates(&self) -> Vec<f64>;
    fn set_coordinates(&mut self, values: &[f64]);
    fn loss(&self) -> f64;
    fn gradient(&self) -> Vec<f64>;

    fn coordinate_name(&self, index: usize) -> String {
        format!("coordinate {index}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    pub worst_coordinate: String,
    pub analytic: f64,
    pub numeric: f64,
    pub checked: usize,
}

/// `|a − b| / max(1e-8, |a| + |b|)`.
pub fn relative_error(a: f64, b: f64) -> f64 {
    abs(a - b) / (abs(a) + abs(b)).max(1e-8)
}

/// Compares the analytic gradient with fourth-order central differences
/// (steps ±ε and ±2ε) at every coordinate.
pub fn grad_check(model: &mut dyn Differentiable, eps: f64) -> Result<GradCheckReport> {
    ensure!(
        (1e-7..=1e-3).contains(&eps),
        "finite-difference step {eps} is outside [1e-7, 1e-3]"
    );
    let base = model.coordinates();
    let analytic = model.gradient();
    ensure!(
        analytic.len() == base.len(),
        "gradient has {} entries for {} coordinates",
        analytic.len(),
        base.len()
    );
    let mut report = GradCheckReport {
        max_relative_error: 0.0,
        worst_coordinate: String::new(),
        analytic: 0.0,
        numeric: 0.0,
        checked: base.len(),
    };
    let mut probe = base.clone();
    for i in 0..base.len() {
        let mut at = |offset: f64| {
            probe[i] = base[i] + offset;
            model.set_coordinates(&probe);
            model.loss()
        };
        let (p1, m1, p2, m2) = (at(eps), at(-eps), at(2.0 * eps), at(-2.0 * eps));
        probe[i] = base[i];
        if ![p1, m1, p2, m2].iter().all(|v| v.is_finite()) {
            model.set_coordinates(&base);
            return Err(Error::NumericalFailure(format!(
                "non-finite loss while probing {}",
                model.coordinate_name(i)
            )));
        }
        let numeric = (8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * eps);
        let err = relative_error(analytic[i], numeric);
        if err > report.max_relative_error || report.worst_coordinate.is_empty() {
            report.max_relative_error = err;
            report.worst_coordinate = model.coordinate_name(i);
            report.analytic = analytic[i];
            report.numeric = numeric;
        }
    }
    model.set_coordinates(&base);
    Ok(report)
}

fn random_vec(rng: &mut Rng, n: usize, bound: f64) -> Vec<f64> {
    (0..n).map(|_| uniform_symmetric(rng, bound)).collect()
}

fn split_name(index: usize, n_params: usize) -> String {
    if index < n_params {
        format!("param[{index}]")
    } else {
        format!("input[{}]", index - n_params)
    }
}

/// Dense layer under the loss `Σ r_o y_o` for a fixed random `r`.
pub struct DenseProbe {
    pub layer: Dense,
    pub input: Vec<f64>,
    pub projection: Vec<f64>,
}

impl DenseProbe {
    pub fn random(in_width: usize, out_width: usize, rng: &mut Rng) -> Result<Self> {
        Ok(Self {
            layer: Dense::init(in_width, out_width, rng)?,
            input: random_vec(rng, in_width, 1.0),
            projection: random_vec(rng, out_width, 1.0),
        })
    }
}

impl Differentiable for DenseProbe {
    fn coordinates(&self) -> Vec<f64> {
        [self.layer.params(), &self.input[..]].concat()
    }
    fn set_coordinates(&mut self, values: &[f64]) {
        let n = self.layer.params().len();
        self.layer.params_mut().copy_from_slice(&values[..n]);
        self.input.copy_from_slice(&values[n..]);
    }
    fn loss(&self) -> f64 {
        dot(&self.layer.forward(&self.input), &self.projection)
    }
    fn gradient(&self) -> Vec<f64> {
        let mut gp = vec![0.0; self.layer.params().len()];
        let gi = self.layer.backward(&self.input, &self.projection, &mut gp);
        [gp, gi].concat()
    }
    fn coordinate_name(&self, index: usize) -> String {
        split_name(index, self.layer.params().len())
    }
}

/// Conv1d under a random linear read-out.
pub struct ConvProbe {
    pub layer: Conv1d,
    pub input: Vec<f64>,
    pub len: usize,
    pub projection: Vec<f64>,
}

impl ConvProbe {
    pub fn random(in_channels: usize, out_channels: usize, kernel: usize, len: usize, rng: &mut Rng) -> Result<Self> {
        let layer = Conv1d::init(in_channels, out_channels, kernel, rng)?;
        let t_out = layer
            .output_len(len)
            .ok_or_else(|| Error::invalid("input shorter than kernel"))?;
        Ok(Self {
            input: random_vec(rng, in_channels * len, 1.0),
            projection: random_vec(rng, out_channels * t_out, 1.0),
            layer,
            len,
        })
    }
}

impl Differentiable for ConvProbe {
    fn coordinates(&self) -> Vec<f64> {
        [self.layer.params(), &self.input[..]].concat()
    }
    fn set_coordinates(&mut self, values: &[f64]) {
        let n = self.layer.params().len();
        self.layer.params_mut().copy_from_slice(&values[..n]);
        self.input.copy_from_slice(&values[n..]);
    }
    fn loss(&self) -> f64 {
        dot(&self.layer.forward(&self.input, self.len), &self.projection)
    }
    fn gradient(&self) -> Vec<f64> {
        let mut gp = vec![0.0; self.layer.params().len()];
        let gi = self.layer.backward(&self.input, self.len, &self.projection, &mut gp);
        [gp, gi].concat()
    }
    fn coordinate_name(&self, index: usize) -> String {
        split_name(index, self.layer.params().len())
    }
}

/// Stacked LSTM under a random read-out of the full hidden sequence.
pub struct LstmProbe {
    pub lstm: Lstm,
    pub input: Vec<f64>,
    pub steps: usize,
    pub projection: Vec<f64>,
}

impl LstmProbe {
    pub fn random(input_size: usize, hidden: usize, layers: usize, steps: usize, rng: &mut Rng) -> Result<Self> {
        Ok(Self {
            lstm: Lstm::init(input_size, hidden, layers, rng)?,
            input: random_vec(rng, steps * input_size, 1.0),
            steps,
            projection: random_vec(rng, steps * hidden, 1.0),
        })
    }

    fn n_params(&self) -> usize {
        self.lstm.layers().iter().map(|l| l.params().len()).sum()
    }
}

impl Differentiable for LstmProbe {
    fn coordinates(&self) -> Vec<f64> {
        let mut c: Vec<f64> = self
            .lstm
            .layers()
            .iter()
            .flat_map(|l| l.params().iter().copied())
            .collect();
        c.extend_from_slice(&self.input);
        c
    }
    fn set_coordinates(&mut self, values: &[f64]) {
        let mut offset = 0;
        for layer in self.lstm.layers_mut() {
            let n = layer.params().len();
            layer.params_mut().copy_from_slice(&values[offset..offset + n]);
            offset += n;
        }
        self.input.copy_from_slice(&values[offset..]);
    }
    fn loss(&self) -> f64 {
        let caches = self.lstm.forward(&self.input, self.steps);
        dot(caches.last().expect("non-empty stack").outputs(), &self.projection)
    }
    fn gradient(&self) -> Vec<f64> {
        let caches = self.lstm.forward(&self.input, self.steps);
        let mut grads: Vec<Vec<f64>> = self.lstm.layers().iter().map(|l| vec![0.0; l.params().len()]).collect();
        let gi = self.lstm.backward(&self.input, &caches, &self.projection, &mut grads);
        let mut out: Vec<f64> = grads.concat();
        out.extend(gi);
        out
    }
    fn coordinate_name(&self, index: usize) -> String {
        split_name(index, self.n_params())
    }
}

/// `conv1d → sigmoid → weighted BCE` with one binary target per output
/// position.
pub struct ConvBceProbe {
    pub layer: Conv1d,
    pub input: Vec<f64>,
    pub len: usize,
    pub targets: Vec<f64>,
    pub weights: Vec<f64>,
}

impl ConvBceProbe {
    pub fn random(in_channels: usize, kernel: usize, len: usize, rng: &mut Rng) -> Result<Self> {
        use rand::Rng as _;
        let layer = Conv1d::init(in_channels, 1, kernel, rng)?;
        let t_out = layer
            .output_len(len)
            .ok_or_else(|| Error::invalid("input shorter than kernel"))?;
        Ok(Self {
            input: random_vec(rng, in_channels * len, 1.0),
            targets: (0..t_out).map(|_| f64::from(rng.random::<bool>() as u8)).collect(),
            weights: (0..t_out).map(|_| 0.5 + rng.random::<f64>()).collect(),
            layer,
            len,
        })
    }

    fn predictions(&self) -> Vec<f64> {
        let mut z = self.layer.forward(&self.input, self.len);
        Activation::Sigmoid.apply_in_place(&mut z);
        z
    }
}

impl Differentiable for ConvBceProbe {
    fn coordinates(&self) -> Vec<f64> {
        [self.layer.params(), &self.input[..]].concat()
    }
    fn set_coordinates(&mut self, values: &[f64]) {
        let n = self.layer.params().len();
        self.layer.params_mut().copy_from_slice(&values[..n]);
        self.input.copy_from_slice(&values[n..]);
    }
    fn loss(&self) -> f64 {
        let p = self.predictions();
        let n = p.len() as f64;
        p.iter()
            .zip(&self.targets)
            .zip(&self.weights)
            .map(|((&x, &y), &w)| bce_term(x, y, w).0)
            .sum::<f64>()
            / n
    }
    fn gradient(&self) -> Vec<f64> {
        let p = self.predictions();
        let n = p.len() as f64;
        let mut g: Vec<f64> = p
            .iter()
            .zip(&self.targets)
            .zip(&self.weights)
            .map(|((&x, &y), &w)| bce_term(x, y, w).1 / n)
            .collect();
        Activation::Sigmoid.backprop_in_place(&p, &mut g);
        let mut gp = vec![0.0; self.layer.params().len()];
        let gi = self.layer.backward(&self.input, self.len, &g, &mut gp);
        [gp, gi].concat()
    }
    fn coordinate_name(&self, index: usize) -> String {
        split_name(index, self.layer.params().len())
    }
}
