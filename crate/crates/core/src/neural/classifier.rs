use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::RngCore;

use super::activation::Activation;
use super::adam::{AdamConfig, AdamState};
use super::conv::Conv1d;
use super::dense::Dense;
use super::dropout::{DropoutMask, DropoutMode};
use super::gradcheck::Differentiable;
use super::loss::bce_term;
use super::lstm::{Lstm, LstmCache};
use super::model::{Gradients, Model, ParamBlock};
use crate::error::{ensure, Error, Result};
use crate::rng::{derived_rng, stream, Rng};

/// Architecture of a single-input `conv → LSTM → dense → sigmoid`
/// classifier.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct ClassifierConfig {
    pub input_channels: usize,
    pub input_len: usize,
    /// `(out_channels, kernel_size)` per convolution, each followed by tanh.
    pub conv: Vec<(usize, usize)>,
    pub lstm_hidden: usize,
    pub lstm_layers: usize,
    /// Hidden dense widths (tanh) before the scalar output.
    pub dense: Vec<usize>,
    pub keep_prob: f64,
    pub seed: u64,
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<()> {
        ensure!(self.input_channels >= 1, "classifier needs at least one input channel");
        ensure!(
            self.lstm_hidden >= 1 && self.lstm_layers >= 1,
            "classifier LSTM sizes must be at least 1"
        );
        ensure!(
            self.keep_prob > 0.0 && self.keep_prob <= 1.0,
            "keep_prob must lie in (0, 1]"
        );
        ensure!(self.dense.iter().all(|&w| w >= 1), "dense widths must be at least 1");
        ensure!(
            self.sequence_len() >= 1,
            "convolutions consume the whole input of length {}",
            self.input_len
        );
        Ok(())
    }

    /// Time steps reaching the LSTM.
    pub fn sequence_len(&self) -> usize {
        self.conv
            .iter()
            .fold(self.input_len as isize, |len, &(_, k)| len - k as isize + 1)
            .max(0) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct FitConfig {
    pub epochs: usize,
    pub batch: usize,
    pub adam: AdamConfig,
    /// Global gradient-norm ceiling per batch; 0 disables clipping.
    pub clip_norm: f64,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            epochs: 10,
            batch: 16,
            adam: AdamConfig::default(),
            clip_norm: 1.0,
            seed: 0,
        }
    }
}

/// Eval-mode BCE after each epoch.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FitHistory {
    pub train_loss: Vec<f64>,
    pub valid_loss: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceClassifier {
    config: ClassifierConfig,
    convs: Vec<Conv1d>,
    lstm: Lstm,
    dense: Vec<Dense>,
    head: Dense,
}

struct Trace {
    /// Post-tanh outputs of each convolution, `C × T`.
    conv_out: Vec<Vec<f64>>,
    /// `T × C` sequence fed to the LSTM.
    sequence: Vec<f64>,
    lstm: Vec<LstmCache>,
    mask: DropoutMask,
    /// Dropped-out last hidden state.
    last: Vec<f64>,
    dense_out: Vec<Vec<f64>>,
    prob: f64,
}

/// `C × T` ↔ `T × C`.
pub(crate) fn transpose(data: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let mut out = vec![0.0; data.len()];
    for r in 0..rows {
        for c in 0..cols {
            out[c * rows + r] = data[r * cols + c];
        }
    }
    out
}

impl SequenceClassifier {
    pub fn new(config: ClassifierConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = derived_rng(config.seed, stream::INIT);
        let mut convs = Vec::with_capacity(config.conv.len());
        let mut channels = config.input_channels;
        for &(out, k) in &config.conv {
            convs.push(Conv1d::init(channels, out, k, &mut rng)?);
            channels = out;
        }
        let lstm = Lstm::init(channels, config.lstm_hidden, config.lstm_layers, &mut rng)?;
        let mut dense = Vec::with_capacity(config.dense.len());
        let mut width = config.lstm_hidden;
        for &w in &config.dense {
            dense.push(Dense::init(width, w, &mut rng)?);
            width = w;
        }
        let head = Dense::init(width, 1, &mut rng)?;
        Ok(Self {
            config,
            convs,
            lstm,
            dense,
            head,
        })
    }

    pub fn config(&self) -> &ClassifierConfig {
        &self.config
    }

    /// Expected flat input length (`channels × len`).
    pub fn input_size(&self) -> usize {
        self.config.input_channels * self.config.input_len
    }

    fn check_input(&self, input: &[f64]) -> Result<()> {
        ensure!(
            input.len() == self.input_size(),
            "classifier expects {} x {} = {} inputs, got {}",
            self.config.input_channels,
            self.config.input_len,
            self.input_size(),
            input.len()
        );
        Ok(())
    }

    fn trace(&self, input: &[f64], mode: DropoutMode, rng: Option<&mut Rng>) -> Trace {
        let mut len = self.config.input_len;
        let mut conv_out: Vec<Vec<f64>> = Vec::with_capacity(self.convs.len());
        for conv in &self.convs {
            let x = conv_out.last().map_or(input, |v| v.as_slice());
            let mut y = conv.forward(x, len);
            Activation::Tanh.apply_in_place(&mut y);
            len = conv.output_len(len).expect("validated lengths");
            conv_out.push(y);
        }
        let channels = self.lstm.input_size();
        let sequence = match conv_out.last() {
            Some(y) => transpose(y, channels, len),
            None => transpose(input, channels, len),
        };
        let lstm = self.lstm.forward(&sequence, len);
        let mut last = lstm.last().expect("non-empty stack").last().to_vec();
        let mask = match (mode, rng) {
            (DropoutMode::Train, Some(rng)) => DropoutMask::sample(last.len(), self.config.keep_prob, rng),
            _ => DropoutMask::identity(last.len()),
        };
        mask.apply(&mut last);
        let mut dense_out: Vec<Vec<f64>> = Vec::with_capacity(self.dense.len());
        for layer in &self.dense {
            let x = dense_out.last().unwrap_or(&last);
            let mut y = layer.forward(x);
            Activation::Tanh.apply_in_place(&mut y);
            dense_out.push(y);
        }
        let z = self.head.forward(dense_out.last().unwrap_or(&last))[0];
        Trace {
            conv_out,
            sequence,
            lstm,
            mask,
            last,
            dense_out,
            prob: crate::math::sigmoid(z),
        }
    }

    /// Backpropagates `d loss / d prob`, accumulating into `grads`.
    fn backward(&self, input: &[f64], trace: &Trace, dprob: f64, grads: &mut Gradients) -> Vec<f64> {
        let n_conv = self.convs.len();
        let n_lstm = self.lstm.layers().len();
        let n_dense = self.dense.len();
        let head_idx = n_conv + n_lstm + n_dense;

        let dz = dprob * trace.prob * (1.0 - trace.prob);
        let head_in = trace.dense_out.last().unwrap_or(&trace.last);
        let mut g = self.head.backward(head_in, &[dz], &mut grads.blocks[head_idx]);
        for i in (0..n_dense).rev() {
            Activation::Tanh.backprop_in_place(&trace.dense_out[i], &mut g);
            let x = if i == 0 { &trace.last } else { &trace.dense_out[i - 1] };
            g = self.dense[i].backward(x, &g, &mut grads.blocks[n_conv + n_lstm + i]);
        }
        trace.mask.apply(&mut g);

        let steps = trace.lstm[0].steps();
        let hidden = self.lstm.hidden_size();
        let mut grad_seq = vec![0.0; steps * hidden];
        grad_seq[(steps - 1) * hidden..].copy_from_slice(&g);
        let lstm_grads = &mut grads.blocks[n_conv..n_conv + n_lstm];
        let g_in = self.lstm.backward(&trace.sequence, &trace.lstm, &grad_seq, lstm_grads);
        let channels = self.lstm.input_size();
        let mut g = transpose(&g_in, steps, channels);

        let mut lens = Vec::with_capacity(n_conv);
        let mut len = self.config.input_len;
        for conv in &self.convs {
            lens.push(len);
            len = conv.output_len(len).expect("validated lengths");
        }
        for i in (0..n_conv).rev() {
            Activation::Tanh.backprop_in_place(&trace.conv_out[i], &mut g);
            let x = if i == 0 { input } else { &trace.conv_out[i - 1] };
            g = self.convs[i].backward(x, lens[i], &g, &mut grads.blocks[i]);
        }
        g
    }

    /// Eval-mode probability.
    pub fn predict(&self, input: &[f64]) -> Result<f64> {
        self.check_input(input)?;
        Ok(self.trace(input, DropoutMode::Eval, None).prob)
    }

    /// Mean eval-mode BCE.
    pub fn mean_loss(&self, data: &[(Vec<f64>, u8)]) -> Result<f64> {
        ensure!(!data.is_empty(), "empty dataset");
        let mut total = 0.0;
        for (x, y) in data {
            total += bce_term(self.predict(x)?, f64::from(*y), 1.0).0;
        }
        Ok(total / data.len() as f64)
    }

    /// Mini-batch Adam on BCE with per-epoch reshuffling.
    pub fn fit(&mut self, train: &[(Vec<f64>, u8)], valid: &[(Vec<f64>, u8)], cfg: &FitConfig) -> Result<FitHistory> {
        ensure!(!train.is_empty(), "empty training set");
        ensure!(cfg.epochs >= 1 && cfg.batch >= 1, "epochs and batch must be at least 1");
        ensure!(cfg.clip_norm >= 0.0, "clip_norm must be non-negative");
        for (x, y) in train.iter().chain(valid) {
            self.check_input(x)?;
            ensure!(*y <= 1, "labels must be 0 or 1");
        }
        let mut adam = AdamState::new(cfg.adam, &self.block_sizes())?;
        let mut shuffle_rng = derived_rng(cfg.seed, stream::SHUFFLE);
        let mut dropout_rng = derived_rng(cfg.seed, stream::DROPOUT);
        let mut grads = Gradients::zeros_like(self);
        let mut order: Vec<usize> = (0..train.len()).collect();
        let mut history = FitHistory::default();

        for epoch in 0..cfg.epochs {
            order.shuffle(&mut shuffle_rng);
            for (b, chunk) in order.chunks(cfg.batch).enumerate() {
                grads.fill_zero();
                let scale = 1.0 / chunk.len() as f64;
                for &i in chunk {
                    let (x, y) = &train[i];
                    let mut rng = crate::rng::rng_from_seed(dropout_rng.next_u64());
                    let trace = self.trace(x, DropoutMode::Train, Some(&mut rng));
                    let (_, dl) = bce_term(trace.prob, f64::from(*y), 1.0);
                    self.backward(x, &trace, dl * scale, &mut grads);
                }
                if !grads.is_finite() {
                    return Err(Error::NumericalFailure(format!(
                        "non-finite gradient at epoch {}, batch {b}",
                        epoch + 1
                    )));
                }
                if cfg.clip_norm > 0.0 {
                    grads.clip_norm(cfg.clip_norm);
                }
                adam.update(&mut self.params_mut(), &grads.blocks)?;
            }
            history.train_loss.push(self.mean_loss(train)?);
            if !valid.is_empty() {
                history.valid_loss.push(self.mean_loss(valid)?);
            }
        }
        Ok(history)
    }

    /// Analytic gradient of `bce(predict(input), label)` with respect to
    /// parameters and input.
    pub fn loss_gradient(&self, input: &[f64], label: u8) -> Result<(f64, Gradients, Vec<f64>)> {
        self.check_input(input)?;
        let trace = self.trace(input, DropoutMode::Eval, None);
        let (loss, dl) = bce_term(trace.prob, f64::from(label), 1.0);
        let mut grads = Gradients::zeros_like(self);
        let gi = self.backward(input, &trace, dl, &mut grads);
        Ok((loss, grads, gi))
    }
}

impl Model for SequenceClassifier {
    fn blocks(&self) -> Vec<ParamBlock<'_>> {
        let mut out = Vec::new();
        for (i, c) in self.convs.iter().enumerate() {
            out.push(ParamBlock {
                name: format!("conv{i}"),
                spec: c.spec(),
                shape: vec![c.out_channels(), c.in_channels(), c.kernel_size()],
                values: c.params(),
            });
        }
        for (i, l) in self.lstm.layers().iter().enumerate() {
            out.push(ParamBlock {
                name: format!("lstm{i}"),
                spec: super::model::LayerSpec::Lstm {
                    input_size: l.input_size(),
                    hidden_size: l.hidden_size(),
                    num_layers: 1,
                },
                shape: vec![4 * l.hidden_size(), l.input_size() + l.hidden_size() + 1],
                values: l.params(),
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
        for c in &mut self.convs {
            out.push(c.params_mut());
        }
        for l in self.lstm.layers_mut() {
            out.push(l.params_mut());
        }
        for d in &mut self.dense {
            out.push(d.params_mut());
        }
        out.push(self.head.params_mut());
        out
    }
}

/// Finite-difference harness over a classifier, one input and its label.
pub struct ClassifierProbe {
    pub net: SequenceClassifier,
    pub input: Vec<f64>,
    pub label: u8,
}

impl Differentiable for ClassifierProbe {
    fn coordinates(&self) -> Vec<f64> {
        let mut c = self.net.flat_params();
        c.extend_from_slice(&self.input);
        c
    }
    fn set_coordinates(&mut self, values: &[f64]) {
        let n = self.net.num_params();
        self.net.set_flat_params(&values[..n]).expect("matching length");
        self.input.copy_from_slice(&values[n..]);
    }
    fn loss(&self) -> f64 {
        self.net
            .loss_gradient(&self.input, self.label)
            .map_or(f64::NAN, |r| r.0)
    }
    fn gradient(&self) -> Vec<f64> {
        let (_, g, gi) = self.net.loss_gradient(&self.input, self.label).expect("valid probe");
        let mut out = g.flat();
        out.extend(gi);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::gradcheck::grad_check;

    fn config() -> ClassifierConfig {
        ClassifierConfig {
            input_channels: 2,
            input_len: 9,
            conv: vec![(3, 3), (2, 2)],
            lstm_hidden: 3,
            lstm_layers: 2,
            dense: vec![4],
            keep_prob: 0.8,
            seed: 7,
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let net = SequenceClassifier::new(config()).unwrap();
        let input: Vec<f64> = (0..18).map(|i| ((i * 37) % 11) as f64 / 11.0 - 0.5).collect();
        let mut probe = ClassifierProbe { net, input, label: 1 };
        let report = grad_check(&mut probe, 1e-3).unwrap();
        assert!(report.max_relative_error < 1e-4, "{report:?}");
    }

    #[test]
    fn output_is_probability_and_input_checked() {
        let net = SequenceClassifier::new(config()).unwrap();
        let p = net.predict(&[0.3; 18]).unwrap();
        assert!((0.0..=1.0).contains(&p));
        assert!(net.predict(&[0.3; 17]).is_err());
    }

    #[test]
    fn learns_a_trivial_split() {
        let mut cfg = config();
        cfg.keep_prob = 1.0;
        let mut net = SequenceClassifier::new(cfg).unwrap();
        let data: Vec<(Vec<f64>, u8)> = (0..32)
            .map(|i| {
                let y = (i % 2) as u8;
                (vec![if y == 1 { 0.8 } else { -0.8 }; 18], y)
            })
            .collect();
        let fit = FitConfig {
            epochs: 30,
            batch: 8,
            adam: AdamConfig {
                learning_rate: 1e-2,
                ..Default::default()
            },
            clip_norm: 1.0,
            seed: 1,
        };
        let h = net.fit(&data, &[], &fit).unwrap();
        assert!(h.train_loss.last().unwrap() < &0.1, "{:?}", h.train_loss);
    }
}
