use alloc::vec;
use alloc::vec::Vec;

use super::model::LayerSpec;
use super::tensor::Tensor;
use crate::error::{ensure, Result};
use crate::math::{axpy, dot, sigmoid, sqrt, tanh};
use crate::rng::{uniform_symmetric, Rng};

/// One LSTM layer. Gate order in every `4H` block is input, forget, cell
/// candidate, output.
///
/// Parameters are `[W_x (4H × D) | W_h (4H × H) | b (4H)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmLayer {
    input_size: usize,
    hidden_size: usize,
    params: Vec<f64>,
}

/// Activations kept from the forward pass for backpropagation through time.
#[derive(Debug, Clone)]
pub struct LstmCache {
    hidden_size: usize,
    /// `(T + 1) × H`, row 0 is the zero initial state.
    pub hidden: Vec<f64>,
    /// `(T + 1) × H`.
    pub cell: Vec<f64>,
    /// `T × 4H`, post-activation.
    pub gates: Vec<f64>,
    /// `T × H`, `tanh(c_t)`.
    pub tanh_cell: Vec<f64>,
}

impl LstmCache {
    pub fn steps(&self) -> usize {
        self.tanh_cell.len() / self.hidden_size
    }

    /// `T × H` hidden states `h_1 … h_T`.
    pub fn outputs(&self) -> &[f64] {
        &self.hidden[self.hidden_size..]
    }

    pub fn last(&self) -> &[f64] {
        &self.hidden[self.hidden.len() - self.hidden_size..]
    }
}

impl LstmLayer {
    pub fn zeros(input_size: usize, hidden_size: usize) -> Result<Self> {
        LayerSpec::Lstm {
            input_size,
            hidden_size,
            num_layers: 1,
        }
        .validate()?;
        let h4 = 4 * hidden_size;
        Ok(Self {
            input_size,
            hidden_size,
            params: vec![0.0; h4 * (input_size + hidden_size + 1)],
        })
    }

    /// Uniform in `±1/√H`, forget-gate bias set to 1.
    pub fn init(input_size: usize, hidden_size: usize, rng: &mut Rng) -> Result<Self> {
        let mut layer = Self::zeros(input_size, hidden_size)?;
        let bound = 1.0 / sqrt(hidden_size as f64);
        for p in &mut layer.params {
            *p = uniform_symmetric(rng, bound);
        }
        let h = hidden_size;
        layer.bias_mut()[h..2 * h].fill(1.0);
        Ok(layer)
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn hidden_size(&self) -> usize {
        self.hidden_size
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn wx_len(&self) -> usize {
        4 * self.hidden_size * self.input_size
    }

    fn wh_len(&self) -> usize {
        4 * self.hidden_size * self.hidden_size
    }

    pub fn input_weights(&self) -> &[f64] {
        &self.params[..self.wx_len()]
    }

    pub fn recurrent_weights(&self) -> &[f64] {
        &self.params[self.wx_len()..self.wx_len() + self.wh_len()]
    }

    pub fn bias(&self) -> &[f64] {
        &self.params[self.wx_len() + self.wh_len()..]
    }

    pub fn bias_mut(&mut self) -> &mut [f64] {
        let start = self.wx_len() + self.wh_len();
        &mut self.params[start..]
    }

    /// One step: returns `(h_t, c_t)` and writes activated gates into
    /// `gates` (length 4H).
    fn step(
        &self,
        x: &[f64],
        h_prev: &[f64],
        c_prev: &[f64],
        gates: &mut [f64],
        h: &mut [f64],
        c: &mut [f64],
        tanh_c: &mut [f64],
    ) {
        let hs = self.hidden_size;
        let (d, wx, wh, b) = (
            self.input_size,
            self.input_weights(),
            self.recurrent_weights(),
            self.bias(),
        );
        for (r, z) in gates.iter_mut().enumerate() {
            *z = b[r] + dot(&wx[r * d..(r + 1) * d], x) + dot(&wh[r * hs..(r + 1) * hs], h_prev);
        }
        for j in 0..hs {
            let i = sigmoid(gates[j]);
            let f = sigmoid(gates[hs + j]);
            let g = tanh(gates[2 * hs + j]);
            let o = sigmoid(gates[3 * hs + j]);
            gates[j] = i;
            gates[hs + j] = f;
            gates[2 * hs + j] = g;
            gates[3 * hs + j] = o;
            c[j] = f * c_prev[j] + i * g;
            tanh_c[j] = tanh(c[j]);
            h[j] = o * tanh_c[j];
        }
    }

    /// Runs `steps` time steps over `inputs` (`T × D`) from zero state.
    pub fn forward(&self, inputs: &[f64], steps: usize) -> LstmCache {
        let (d, hs) = (self.input_size, self.hidden_size);
        debug_assert_eq!(inputs.len(), steps * d);
        let mut cache = LstmCache {
            hidden_size: hs,
            hidden: vec![0.0; (steps + 1) * hs],
            cell: vec![0.0; (steps + 1) * hs],
            gates: vec![0.0; steps * 4 * hs],
            tanh_cell: vec![0.0; steps * hs],
        };
        for t in 0..steps {
            let (h_done, h_rest) = cache.hidden.split_at_mut((t + 1) * hs);
            let (c_done, c_rest) = cache.cell.split_at_mut((t + 1) * hs);
            self.step(
                &inputs[t * d..(t + 1) * d],
                &h_done[t * hs..],
                &c_done[t * hs..],
                &mut cache.gates[t * 4 * hs..(t + 1) * 4 * hs],
                &mut h_rest[..hs],
                &mut c_rest[..hs],
                &mut cache.tanh_cell[t * hs..(t + 1) * hs],
            );
        }
        cache
    }

    /// Backpropagation through time. `grad_h` is `T × H` (gradient arriving
    /// at each output); parameter gradients accumulate into `grad_params`.
    /// Returns the `T × D` input gradient.
    pub fn backward(&self, inputs: &[f64], cache: &LstmCache, grad_h: &[f64], grad_params: &mut [f64]) -> Vec<f64> {
        let (d, hs) = (self.input_size, self.hidden_size);
        let steps = cache.steps();
        let (wx, wh) = (self.input_weights(), self.recurrent_weights());
        let (wxl, whl) = (self.wx_len(), self.wh_len());
        let (gwx, rest) = grad_params.split_at_mut(wxl);
        let (gwh, gb) = rest.split_at_mut(whl);

        let mut grad_in = vec![0.0; steps * d];
        let mut dh_next = vec![0.0; hs];
        let mut dc_next = vec![0.0; hs];
        let mut dz = vec![0.0; 4 * hs];
        for t in (0..steps).rev() {
            let gates = &cache.gates[t * 4 * hs..(t + 1) * 4 * hs];
            let tanh_c = &cache.tanh_cell[t * hs..(t + 1) * hs];
            let c_prev = &cache.cell[t * hs..(t + 1) * hs];
            let h_prev = &cache.hidden[t * hs..(t + 1) * hs];
            let x = &inputs[t * d..(t + 1) * d];
            for j in 0..hs {
                let (i, f, g, o) = (gates[j], gates[hs + j], gates[2 * hs + j], gates[3 * hs + j]);
                let dh = grad_h[t * hs + j] + dh_next[j];
                let tc = tanh_c[j];
                let dc = dc_next[j] + dh * o * (1.0 - tc * tc);
                dz[j] = dc * g * i * (1.0 - i);
                dz[hs + j] = dc * c_prev[j] * f * (1.0 - f);
                dz[2 * hs + j] = dc * i * (1.0 - g * g);
                dz[3 * hs + j] = dh * tc * o * (1.0 - o);
                dc_next[j] = dc * f;
            }
            dh_next.fill(0.0);
            let gx = &mut grad_in[t * d..(t + 1) * d];
            for (r, &z) in dz.iter().enumerate() {
                if z == 0.0 {
                    continue;
                }
                gb[r] += z;
                axpy(z, x, &mut gwx[r * d..(r + 1) * d]);
                axpy(z, h_prev, &mut gwh[r * hs..(r + 1) * hs]);
                axpy(z, &wx[r * d..(r + 1) * d], gx);
                axpy(z, &wh[r * hs..(r + 1) * hs], &mut dh_next);
            }
        }
        grad_in
    }
}

/// Stacked LSTM; each layer reads the hidden sequence of the one below.
#[derive(Debug, Clone, PartialEq)]
pub struct Lstm {
    layers: Vec<LstmLayer>,
}

impl Lstm {
    pub fn init(input_size: usize, hidden_size: usize, num_layers: usize, rng: &mut Rng) -> Result<Self> {
        LayerSpec::Lstm {
            input_size,
            hidden_size,
            num_layers,
        }
        .validate()?;
        let layers = (0..num_layers)
            .map(|l| LstmLayer::init(if l == 0 { input_size } else { hidden_size }, hidden_size, rng))
            .collect::<Result<_>>()?;
        Ok(Self { layers })
    }

    pub fn from_layers(layers: Vec<LstmLayer>) -> Result<Self> {
        ensure!(!layers.is_empty(), "an LSTM stack needs at least one layer");
        for pair in layers.windows(2) {
            ensure!(
                pair[1].input_size == pair[0].hidden_size,
                "stacked LSTM layer expects input {} but the layer below emits {}",
                pair[1].input_size,
                pair[0].hidden_size
            );
        }
        Ok(Self { layers })
    }

    pub fn spec(&self) -> LayerSpec {
        LayerSpec::Lstm {
            input_size: self.layers[0].input_size,
            hidden_size: self.hidden_size(),
            num_layers: self.layers.len(),
        }
    }

    pub fn layers(&self) -> &[LstmLayer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [LstmLayer] {
        &mut self.layers
    }

    pub fn input_size(&self) -> usize {
        self.layers[0].input_size
    }

    pub fn hidden_size(&self) -> usize {
        self.layers[self.layers.len() - 1].hidden_size
    }

    /// Caches for every layer, bottom first.
    pub fn forward(&self, inputs: &[f64], steps: usize) -> Vec<LstmCache> {
        let mut caches: Vec<LstmCache> = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let cache = match caches.last() {
                None => layer.forward(inputs, steps),
                Some(below) => layer.forward(below.outputs(), steps),
            };
            caches.push(cache);
        }
        caches
    }

    /// `grad_out` is `T × H` at the top layer; `grads` holds one buffer per
    /// layer. Returns the gradient with respect to `inputs`.
    pub fn backward(&self, inputs: &[f64], caches: &[LstmCache], grad_out: &[f64], grads: &mut [Vec<f64>]) -> Vec<f64> {
        let mut grad = grad_out.to_vec();
        for l in (0..self.layers.len()).rev() {
            let layer_in = if l == 0 { inputs } else { caches[l - 1].outputs() };
            grad = self.layers[l].backward(layer_in, &caches[l], &grad, &mut grads[l]);
        }
        grad
    }
}

/// Single LSTM step from explicit state.
pub fn lstm_cell(x: &Tensor, h_prev: &Tensor, c_prev: &Tensor, layer: &LstmLayer) -> Result<(Tensor, Tensor)> {
    let hs = layer.hidden_size;
    ensure!(
        x.len() == layer.input_size,
        "input has {} features, layer expects {}",
        x.len(),
        layer.input_size
    );
    ensure!(
        h_prev.len() == hs && c_prev.len() == hs,
        "state vectors must have {hs} entries"
    );
    let mut gates = vec![0.0; 4 * hs];
    let mut h = vec![0.0; hs];
    let mut c = vec![0.0; hs];
    let mut tc = vec![0.0; hs];
    layer.step(
        x.values(),
        h_prev.values(),
        c_prev.values(),
        &mut gates,
        &mut h,
        &mut c,
        &mut tc,
    );
    Ok((Tensor::from_slice(&h), Tensor::from_slice(&c)))
}

/// Runs a stack over `T × D` inputs and returns the top layer's `T × H`
/// hidden sequence, or only `h_T` (shape `[H]`) with `last_only`.
pub fn lstm_sequence(inputs: &Tensor, lstm: &Lstm, last_only: bool) -> Result<Tensor> {
    ensure!(inputs.shape().len() == 2, "LSTM input must be T x D");
    let (steps, d) = (inputs.shape()[0], inputs.shape()[1]);
    ensure!(steps >= 1, "LSTM input needs at least one step");
    ensure!(
        d == lstm.input_size(),
        "input has {d} features, LSTM expects {}",
        lstm.input_size()
    );
    let caches = lstm.forward(inputs.values(), steps);
    let top = caches.last().expect("at least one layer");
    if last_only {
        Ok(Tensor::from_slice(top.last()))
    } else {
        Tensor::new(vec![steps, lstm.hidden_size()], top.outputs().to_vec())
    }
}
