use alloc::format;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::metrics::{classification_metrics, Metrics};
use super::network::FusionNetwork;
use crate::dsp::FusionSample;
use crate::error::{ensure, Error, Result};
use crate::neural::{AdamState, Gradients, Model};
use crate::rng::{derived_rng, stream};

/// Fraction of the windows used for training.
pub const TRAIN_FRACTION: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EpochRecord {
    /// 0 is the untrained network.
    pub epoch: usize,
    pub train_loss: f64,
    pub test_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainHistory {
    pub records: Vec<EpochRecord>,
}

impl TrainHistory {
    pub fn last(&self) -> Option<&EpochRecord> {
        self.records.last()
    }
}

/// Chronological split: the first 80 % of windows train, the rest test,
/// with the `G` windows after the boundary dropped so no test window shares
/// a step with a training window.
pub fn split_samples(samples: &[FusionSample]) -> Result<(Vec<FusionSample>, Vec<FusionSample>)> {
    ensure!(!samples.is_empty(), "no samples to split");
    let g = samples[0].window();
    let n_train = (samples.len() as f64 * TRAIN_FRACTION) as usize;
    ensure!(
        samples.len() > n_train + g,
        "{} windows leave no test data after the {g}-window gap",
        samples.len()
    );
    Ok((samples[..n_train].to_vec(), samples[n_train + g..].to_vec()))
}

/// Mean eval-mode loss under the network's objective.
pub fn mean_loss(net: &FusionNetwork, samples: &[FusionSample]) -> Result<f64> {
    ensure!(!samples.is_empty(), "no samples");
    let kind = net.config().loss;
    let mut total = 0.0;
    for s in samples {
        let p = net.predict(s)?;
        total += kind.term(p, f64::from(s.label), s.weight).0;
    }
    Ok(total / samples.len() as f64)
}

/// Mini-batch Adam with per-epoch reshuffling. Records the eval-mode train
/// and test loss before training and after every epoch.
pub fn train_split(
    net: &mut FusionNetwork,
    train: &[FusionSample],
    test: &[FusionSample],
    on_epoch: &mut dyn FnMut(&EpochRecord),
) -> Result<TrainHistory> {
    let cfg = net.config().clone();
    ensure!(
        train.len() >= 2 * cfg.batch,
        "training needs at least 2 x batch = {} samples, got {}",
        2 * cfg.batch,
        train.len()
    );
    ensure!(!test.is_empty(), "empty test set");
    let mut adam = AdamState::new(cfg.adam(), &net.block_sizes())?;
    let mut shuffle_rng = derived_rng(cfg.seed, stream::SHUFFLE);
    let mut dropout_rng = derived_rng(cfg.seed, stream::DROPOUT);
    let mut grads = Gradients::zeros_like(net);
    let mut order: Vec<usize> = (0..train.len()).collect();

    let mut history = TrainHistory::default();
    let record = |net: &FusionNetwork, epoch| -> Result<EpochRecord> {
        Ok(EpochRecord {
            epoch,
            train_loss: mean_loss(net, train)?,
            test_loss: mean_loss(net, test)?,
        })
    };
    let first = record(net, 0)?;
    on_epoch(&first);
    history.records.push(first);

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut shuffle_rng);
        for (b, chunk) in order.chunks(cfg.batch).enumerate() {
            grads.fill_zero();
            let scale = 1.0 / chunk.len() as f64;
            let mut batch_loss = 0.0;
            for &i in chunk {
                let (loss, _) = net.accumulate_gradient(&train[i], Some(&mut dropout_rng), scale, &mut grads)?;
                batch_loss += loss;
            }
            if !batch_loss.is_finite() || !grads.is_finite() {
                return Err(Error::NumericalFailure(format!(
                    "non-finite loss or gradient at epoch {epoch}, batch {b}"
                )));
            }
            adam.update(&mut net.params_mut(), &grads.blocks)?;
        }
        let r = record(net, epoch)?;
        if !r.train_loss.is_finite() || !r.test_loss.is_finite() {
            return Err(Error::NumericalFailure(format!("non-finite loss after epoch {epoch}")));
        }
        on_epoch(&r);
        history.records.push(r);
    }
    Ok(history)
}

/// Splits `samples` chronologically and trains on the first part.
pub fn train(net: &mut FusionNetwork, samples: &[FusionSample]) -> Result<TrainHistory> {
    let (tr, te) = split_samples(samples)?;
    train_split(net, &tr, &te, &mut |_| {})
}

/// One point of the predicted-versus-truth sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Prediction {
    /// Stream step of the window's last element.
    pub step: usize,
    pub pred: f64,
    pub truth: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub metrics: Metrics,
    pub predictions: Vec<Prediction>,
}

/// Eval-mode metrics at `threshold` plus the prediction sequence.
pub fn evaluate(net: &FusionNetwork, samples: &[FusionSample], threshold: f64) -> Result<Evaluation> {
    ensure!(!samples.is_empty(), "no samples to evaluate");
    let kind = net.config().loss;
    let mut scores = Vec::with_capacity(samples.len());
    let mut labels = Vec::with_capacity(samples.len());
    let mut predictions = Vec::with_capacity(samples.len());
    let mut loss = 0.0;
    for s in samples {
        let p = net.predict(s)?;
        loss += kind.term(p, f64::from(s.label), s.weight).0;
        scores.push(p);
        labels.push(s.label);
        predictions.push(Prediction {
            step: s.start + s.window() - 1,
            pred: p,
            truth: s.label,
        });
    }
    let mut metrics = classification_metrics(&scores, &labels, threshold)?;
    metrics.loss = loss / samples.len() as f64;
    Ok(Evaluation { metrics, predictions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fusion::FusionConfig;
    use alloc::vec;

    fn samples(n: usize, label: impl Fn(usize) -> u8) -> Vec<FusionSample> {
        (0..n)
            .map(|k| {
                let y = label(k);
                let v = if y == 1 { 0.8 } else { 0.2 };
                let mut s = FusionSample::new(8, vec![v; 48], y, 1.0).unwrap();
                s.start = k;
                s
            })
            .collect()
    }

    fn small() -> FusionConfig {
        FusionConfig {
            conv_channels: 2,
            branch_lstm_layers: 1,
            branch_hidden: 3,
            fusion_hidden_1: 4,
            fusion_hidden_2: 4,
            dense_widths: vec![3],
            learning_rate: 3e-2,
            epochs: 5,
            batch: 8,
            ..FusionConfig::for_window(8)
        }
    }

    #[test]
    fn split_leaves_a_gap() {
        let s = samples(100, |_| 0);
        let (tr, te) = split_samples(&s).unwrap();
        assert_eq!(tr.len(), 80);
        assert_eq!(te[0].start, 88);
        assert!(tr.last().unwrap().start + 8 <= te[0].start);
    }

    #[test]
    fn constant_labels_fit_quickly() {
        let mut net = FusionNetwork::new(small()).unwrap();
        let h = train(&mut net, &samples(120, |_| 1)).unwrap();
        assert_eq!(h.records.len(), 6);
        assert!(h.last().unwrap().train_loss < 0.05, "{:?}", h.records);
    }

    #[test]
    fn training_is_reproducible() {
        let data = samples(120, |k| ((k / 10) % 2) as u8);
        let run = || {
            let mut net = FusionNetwork::new(small()).unwrap();
            let h = train(&mut net, &data).unwrap();
            (h, net.flat_params())
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn too_few_samples_rejected() {
        let mut net = FusionNetwork::new(small()).unwrap();
        assert!(train(&mut net, &samples(30, |_| 1)).is_err());
    }

    #[test]
    fn evaluation_reports_window_end_steps() {
        let net = FusionNetwork::new(small()).unwrap();
        let e = evaluate(&net, &samples(10, |k| (k % 2) as u8), 0.5).unwrap();
        assert_eq!(e.predictions[0].step, 7);
        assert_eq!(e.metrics.samples, 10);
    }
}
