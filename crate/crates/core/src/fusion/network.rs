use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::config::FusionConfig;
use crate::dsp::{FusionSample, BRANCHES, CHANNELS};
use crate::error::{ensure, Result};
use crate::math::sigmoid;
use crate::neural::{
    Activation, Conv1d, Dense, Differentiable, DropoutMask, DropoutMode, Gradients, LayerSpec, Lstm, LstmCache,
    LstmLayer, Model, ParamBlock,
};
use crate::rng::{derived_rng, rng_from_seed, stream, Rng};

#[derive(Debug, Clone, PartialEq)]
struct Branch {
    conv: Conv1d,
    lstm: Lstm,
}

/// Three conv → LSTM branches, two fusion LSTMs and a dense head.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionNetwork {
    config: FusionConfig,
    branches: Vec<Branch>,
    fusion_1: LstmLayer,
    fusion_2: LstmLayer,
    dense: Vec<Dense>,
    head: Dense,
}

struct BranchTrace {
    /// Post-tanh convolution output, `C × T`.
    conv_out: Vec<f64>,
    /// `T × C`.
    sequence: Vec<f64>,
    lstm: Vec<LstmCache>,
    mask: DropoutMask,
}

struct Trace {
    branches: Vec<BranchTrace>,
    /// `T × 3Hb` after dropout and sensor weighting.
    concat: Vec<f64>,
    fusion_1: LstmCache,
    mask_1: DropoutMask,
    /// `T × H1` after dropout.
    fusion_1_out: Vec<f64>,
    fusion_2: LstmCache,
    mask_2: DropoutMask,
    last: Vec<f64>,
    dense_out: Vec<Vec<f64>>,
    prob: f64,
}

fn transpose(data: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let mut out = vec![0.0; data.len()];
    for r in 0..rows {
        for c in 0..cols {
            out[c * rows + r] = data[r * cols + c];
        }
    }
    out
}

fn mask_for(len: usize, keep: f64, rng: &mut Option<&mut Rng>) -> DropoutMask {
    match rng {
        Some(rng) => DropoutMask::sample(len, keep, rng),
        None => DropoutMask::identity(len),
    }
}

/// Builds a network with parameters drawn from the config seed.
pub fn build_fusion_network(config: &FusionConfig) -> Result<FusionNetwork> {
    FusionNetwork::new(config.clone())
}

impl FusionNetwork {
    pub fn new(config: FusionConfig) -> Result<Self> {
        config.validate()?;
        let c = &config;
        let mut rng = derived_rng(c.seed, stream::INIT);
        let mut branches = Vec::with_capacity(BRANCHES);
        for _ in 0..BRANCHES {
            let conv = Conv1d::init(CHANNELS, c.conv_channels, c.conv_kernel, &mut rng)?;
            let lstm = Lstm::init(c.conv_channels, c.branch_hidden, c.branch_lstm_layers, &mut rng)?;
            branches.push(Branch { conv, lstm });
        }
        let fusion_1 = LstmLayer::init(BRANCHES * c.branch_hidden, c.fusion_hidden_1, &mut rng)?;
        let fusion_2 = LstmLayer::init(c.fusion_hidden_1, c.fusion_hidden_2, &mut rng)?;
        let mut dense = Vec::with_capacity(c.dense_widths.len());
        let mut width = c.fusion_hidden_2;
        for &w in &c.dense_widths {
            dense.push(Dense::init(width, w, &mut rng)?);
            width = w;
        }
        let head = Dense::init(width, 1, &mut rng)?;
        Ok(Self {
            config,
            branches,
            fusion_1,
            fusion_2,
            dense,
            head,
        })
    }

    pub fn config(&self) -> &FusionConfig {
        &self.config
    }

    /// Replaces the per-branch reliability multipliers.
    pub fn set_sensor_weights(&mut self, weights: [f64; 3]) -> Result<()> {
        ensure!(
            weights.iter().all(|w| (0.0..=1.0).contains(w)),
            "sensor weights {weights:?} must lie in [0, 1]"
        );
        self.config.sensor_weights = weights;
        Ok(())
    }

    fn check(&self, sample: &FusionSample) -> Result<()> {
        ensure!(
            sample.window() == self.config.window,
            "sample window {} does not match the network's G = {}",
            sample.window(),
            self.config.window
        );
        Ok(())
    }

    fn trace(&self, sample: &FusionSample, mut rng: Option<&mut Rng>) -> Trace {
        let c = &self.config;
        let g = c.window;
        let steps = c.steps();
        let hb = c.branch_hidden;
        let mut branches = Vec::with_capacity(BRANCHES);
        let mut concat = vec![0.0; steps * BRANCHES * hb];
        for (b, branch) in self.branches.iter().enumerate() {
            let mut conv_out = branch.conv.forward(sample.branch(b), g);
            Activation::Tanh.apply_in_place(&mut conv_out);
            let sequence = transpose(&conv_out, c.conv_channels, steps);
            let lstm = branch.lstm.forward(&sequence, steps);
            let mask = mask_for(steps * hb, c.keep_prob, &mut rng);
            let out = lstm.last().expect("non-empty stack").outputs();
            let w = c.sensor_weights[b];
            for t in 0..steps {
                for j in 0..hb {
                    concat[t * BRANCHES * hb + b * hb + j] = out[t * hb + j] * mask.scale()[t * hb + j] * w;
                }
            }
            branches.push(BranchTrace {
                conv_out,
                sequence,
                lstm,
                mask,
            });
        }

        let fusion_1 = self.fusion_1.forward(&concat, steps);
        let mask_1 = mask_for(steps * c.fusion_hidden_1, c.keep_prob, &mut rng);
        let mut fusion_1_out = fusion_1.outputs().to_vec();
        mask_1.apply(&mut fusion_1_out);
        let fusion_2 = self.fusion_2.forward(&fusion_1_out, steps);
        let mask_2 = mask_for(c.fusion_hidden_2, c.keep_prob, &mut rng);
        let mut last = fusion_2.last().to_vec();
        mask_2.apply(&mut last);

        let mut dense_out: Vec<Vec<f64>> = Vec::with_capacity(self.dense.len());
        for layer in &self.dense {
            let x = dense_out.last().unwrap_or(&last);
            let mut y = layer.forward(x);
            Activation::Tanh.apply_in_place(&mut y);
            dense_out.push(y);
        }
        let z = self.head.forward(dense_out.last().unwrap_or(&last))[0];
        Trace {
            branches,
            concat,
            fusion_1,
            mask_1,
            fusion_1_out,
            fusion_2,
            mask_2,
            last,
            dense_out,
            prob: sigmoid(z),
        }
    }

    /// Block indices: per branch one conv block then its LSTM layers, then
    /// fusion 1, fusion 2, the dense chain and the head.
    fn branch_offset(&self, b: usize) -> usize {
        b * (1 + self.config.branch_lstm_layers)
    }

    /// Backpropagates `d loss / d prob`; returns the input gradient in the
    /// sample's `[branch][channel][step]` layout.
    fn backward(&self, sample: &FusionSample, trace: &Trace, dprob: f64, grads: &mut Gradients) -> Vec<f64> {
        let c = &self.config;
        let (g, steps, hb) = (c.window, c.steps(), c.branch_hidden);
        let f1 = self.branch_offset(BRANCHES);
        let n_dense = self.dense.len();
        let head = f1 + 2 + n_dense;

        let dz = dprob * trace.prob * (1.0 - trace.prob);
        let head_in = trace.dense_out.last().unwrap_or(&trace.last);
        let mut grad = self.head.backward(head_in, &[dz], &mut grads.blocks[head]);
        for i in (0..n_dense).rev() {
            Activation::Tanh.backprop_in_place(&trace.dense_out[i], &mut grad);
            let x = if i == 0 { &trace.last } else { &trace.dense_out[i - 1] };
            grad = self.dense[i].backward(x, &grad, &mut grads.blocks[f1 + 2 + i]);
        }
        trace.mask_2.apply(&mut grad);

        let h2 = c.fusion_hidden_2;
        let mut grad_seq = vec![0.0; steps * h2];
        grad_seq[(steps - 1) * h2..].copy_from_slice(&grad);
        let mut grad_1 = self.fusion_2.backward(
            &trace.fusion_1_out,
            &trace.fusion_2,
            &grad_seq,
            &mut grads.blocks[f1 + 1],
        );
        trace.mask_1.apply(&mut grad_1);
        let grad_concat = self
            .fusion_1
            .backward(&trace.concat, &trace.fusion_1, &grad_1, &mut grads.blocks[f1]);

        let mut grad_input = vec![0.0; BRANCHES * CHANNELS * g];
        for (b, (branch, bt)) in self.branches.iter().zip(&trace.branches).enumerate() {
            let w = c.sensor_weights[b];
            let mut grad_out = vec![0.0; steps * hb];
            if w != 0.0 {
                for t in 0..steps {
                    for j in 0..hb {
                        grad_out[t * hb + j] =
                            grad_concat[t * BRANCHES * hb + b * hb + j] * w * bt.mask.scale()[t * hb + j];
                    }
                }
            }
            let off = self.branch_offset(b);
            let layers = c.branch_lstm_layers;
            let grad_seq = branch.lstm.backward(
                &bt.sequence,
                &bt.lstm,
                &grad_out,
                &mut grads.blocks[off + 1..off + 1 + layers],
            );
            let mut grad_conv = transpose(&grad_seq, steps, c.conv_channels);
            Activation::Tanh.backprop_in_place(&bt.conv_out, &mut grad_conv);
            let gi = branch
                .conv
                .backward(sample.branch(b), g, &grad_conv, &mut grads.blocks[off]);
            grad_input[b * CHANNELS * g..(b + 1) * CHANNELS * g].copy_from_slice(&gi);
        }
        grad_input
    }

    /// Probability for one sample. Training mode samples dropout masks from
    /// `rng`; evaluation mode is deterministic.
    pub fn forward(&self, sample: &FusionSample, mode: DropoutMode, rng: Option<&mut Rng>) -> Result<f64> {
        self.check(sample)?;
        let rng = match mode {
            DropoutMode::Train => rng,
            DropoutMode::Eval => None,
        };
        Ok(self.trace(sample, rng).prob)
    }

    pub fn predict(&self, sample: &FusionSample) -> Result<f64> {
        self.forward(sample, DropoutMode::Eval, None)
    }

    /// Loss of one sample under the configured objective, accumulating
    /// `scale · d loss / d params` into `grads`. Returns `(loss, prob)`.
    pub fn accumulate_gradient(
        &self,
        sample: &FusionSample,
        rng: Option<&mut Rng>,
        scale: f64,
        grads: &mut Gradients,
    ) -> Result<(f64, f64)> {
        self.check(sample)?;
        let trace = self.trace(sample, rng);
        let (loss, dl) = self
            .config
            .loss
            .term(trace.prob, f64::from(sample.label), sample.weight);
        self.backward(sample, &trace, dl * scale, grads);
        Ok((loss, trace.prob))
    }

    /// Eval-mode loss, parameter gradient and input gradient of one sample.
    pub fn loss_gradient(&self, sample: &FusionSample) -> Result<(f64, Gradients, Vec<f64>)> {
        self.check(sample)?;
        let trace = self.trace(sample, None);
        let (loss, dl) = self
            .config
            .loss
            .term(trace.prob, f64::from(sample.label), sample.weight);
        let mut grads = Gradients::zeros_like(self);
        let gi = self.backward(sample, &trace, dl, &mut grads);
        Ok((loss, grads, gi))
    }
}

/// `fusion_forward` with dropout masks drawn from `seed` in training mode.
pub fn fusion_forward(net: &FusionNetwork, sample: &FusionSample, mode: DropoutMode, seed: u64) -> Result<f64> {
    let mut rng = rng_from_seed(seed);
    net.forward(sample, mode, Some(&mut rng))
}

fn lstm_block(layer: &LstmLayer) -> (LayerSpec, Vec<usize>) {
    (
        LayerSpec::Lstm {
            input_size: layer.input_size(),
            hidden_size: layer.hidden_size(),
            num_layers: 1,
        },
        vec![4 * layer.hidden_size(), layer.input_size() + layer.hidden_size() + 1],
    )
}

impl Model for FusionNetwork {
    fn blocks(&self) -> Vec<ParamBlock<'_>> {
        let mut out = Vec::new();
        for (b, branch) in self.branches.iter().enumerate() {
            let conv = &branch.conv;
            out.push(ParamBlock {
                name: format!("branch{b}.conv"),
                spec: conv.spec(),
                shape: vec![conv.out_channels(), conv.in_channels(), conv.kernel_size()],
                values: conv.params(),
            });
            for (l, layer) in branch.lstm.layers().iter().enumerate() {
                let (spec, shape) = lstm_block(layer);
                out.push(ParamBlock {
                    name: format!("branch{b}.lstm{l}"),
                    spec,
                    shape,
                    values: layer.params(),
                });
            }
        }
        for (name, layer) in [("fusion.lstm1", &self.fusion_1), ("fusion.lstm2", &self.fusion_2)] {
            let (spec, shape) = lstm_block(layer);
            out.push(ParamBlock {
                name: String::from(name),
                spec,
                shape,
                values: layer.params(),
            });
        }
        for (i, d) in self.dense.iter().enumerate() {
            out.push(ParamBlock {
                name: format!("dense{i}"),
                spec: d.spec(),
                shape: vec![d.out_width(), d.in_width() + 1],
                values: d.params(),
            });
        }
        out.push(ParamBlock {
            name: String::from("head"),
            spec: self.head.spec(),
            shape: vec![1, self.head.in_width() + 1],
            values: self.head.params(),
        });
        out
    }

    fn params_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::new();
        for branch in &mut self.branches {
            out.push(branch.conv.params_mut());
            for layer in branch.lstm.layers_mut() {
                out.push(layer.params_mut());
            }
        }
        out.push(self.fusion_1.params_mut());
        out.push(self.fusion_2.params_mut());
        for d in &mut self.dense {
            out.push(d.params_mut());
        }
        out.push(self.head.params_mut());
        out
    }
}

/// Finite-difference harness over the whole network and one sample.
pub struct FusionProbe {
    pub net: FusionNetwork,
    pub sample: FusionSample,
}

impl Differentiable for FusionProbe {
    fn coordinates(&self) -> Vec<f64> {
        let mut c = self.net.flat_params();
        c.extend_from_slice(self.sample.data());
        c
    }

    fn set_coordinates(&mut self, values: &[f64]) {
        let n = self.net.num_params();
        self.net.set_flat_params(&values[..n]).expect("matching length");
        self.sample.data_mut().copy_from_slice(&values[n..]);
    }

    fn loss(&self) -> f64 {
        self.net.loss_gradient(&self.sample).map_or(f64::NAN, |r| r.0)
    }

    fn gradient(&self) -> Vec<f64> {
        let (_, g, gi) = self.net.loss_gradient(&self.sample).expect("valid probe");
        let mut out = g.flat();
        out.extend(gi);
        out
    }

    fn coordinate_name(&self, index: usize) -> String {
        let mut offset = 0;
        for block in self.net.blocks() {
            if index < offset + block.values.len() {
                return format!("{}[{}]", block.name, index - offset);
            }
            offset += block.values.len();
        }
        format!("input[{}]", index - offset)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::grad_check;
    use crate::rng::uniform_symmetric;

    fn tiny() -> FusionConfig {
        FusionConfig {
            conv_channels: 2,
            branch_lstm_layers: 2,
            branch_hidden: 2,
            fusion_hidden_1: 3,
            fusion_hidden_2: 3,
            dense_widths: vec![3, 2],
            keep_prob: 0.8,
            ..FusionConfig::for_window(8)
        }
    }

    fn sample(seed: u64) -> FusionSample {
        let mut rng = rng_from_seed(seed);
        let data = (0..48).map(|_| 0.5 + uniform_symmetric(&mut rng, 0.5)).collect();
        FusionSample::new(8, data, 1, 1.0).unwrap()
    }

    #[test]
    fn same_seed_same_parameters() {
        let a = FusionNetwork::new(tiny()).unwrap();
        let b = FusionNetwork::new(tiny()).unwrap();
        assert_eq!(a.flat_params(), b.flat_params());
        let mut other = tiny();
        other.seed = 1;
        assert_ne!(a.flat_params(), FusionNetwork::new(other).unwrap().flat_params());
    }

    #[test]
    fn eval_is_deterministic_train_is_not() {
        let net = FusionNetwork::new(tiny()).unwrap();
        let s = sample(3);
        let p = net.predict(&s).unwrap();
        assert!(p > 0.0 && p < 1.0);
        assert_eq!(p, net.predict(&s).unwrap());
        let t1 = fusion_forward(&net, &s, DropoutMode::Train, 1).unwrap();
        let t2 = fusion_forward(&net, &s, DropoutMode::Train, 2).unwrap();
        assert_ne!(t1, t2);
    }

    #[test]
    fn zero_weight_masks_a_branch() {
        let mut net = FusionNetwork::new(tiny()).unwrap();
        net.set_sensor_weights([0.0, 1.0, 1.0]).unwrap();
        let a = sample(4);
        let mut b = a.clone();
        for v in b.branch_mut(0) {
            *v = 0.123;
        }
        assert_eq!(net.predict(&a).unwrap(), net.predict(&b).unwrap());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let net = FusionNetwork::new(tiny()).unwrap();
        let mut probe = FusionProbe { net, sample: sample(9) };
        let report = grad_check(&mut probe, 1e-3).unwrap();
        assert!(report.max_relative_error < 1e-4, "{report:?}");
    }

    #[test]
    fn window_mismatch_rejected() {
        let net = FusionNetwork::new(tiny()).unwrap();
        let s = FusionSample::new(9, vec![0.5; 54], 0, 1.0).unwrap();
        assert!(net.predict(&s).is_err());
    }
}
