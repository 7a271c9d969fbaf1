use alloc::vec;
use alloc::vec::Vec;

use crate::dsp::{cross_correlate, moving_average};
use crate::error::{ensure, Result};
use crate::math::{dot, sigmoid, sqrt};
use crate::neural::{ClassifierConfig, SequenceClassifier};

/// Moving-average cascade whose successive differences form the sub-bands.
pub const SUBBAND_WIDTHS: [usize; 5] = [1, 3, 7, 15, 31];

/// Steepness of the logistic that maps dissimilarity to probability.
pub const CORRELATION_SLOPE: f64 = 10.0;

/// Four band-pass components of `signal`, highest frequency first.
pub fn acoustic_subbands(signal: &[f64]) -> Result<Vec<Vec<f64>>> {
    ensure!(!signal.is_empty(), "empty acoustic signal");
    let smoothed: Vec<Vec<f64>> = SUBBAND_WIDTHS
        .iter()
        .map(|&w| moving_average(signal, w))
        .collect::<Result<_>>()?;
    Ok(smoothed
        .windows(2)
        .map(|pair| pair[0].iter().zip(&pair[1]).map(|(a, b)| a - b).collect())
        .collect())
}

/// Largest absolute normalized cross-correlation over all lags; 0 when
/// either input has no energy.
pub fn peak_correlation(x: &[f64], y: &[f64]) -> f64 {
    let norm = sqrt(dot(x, x) * dot(y, y));
    if norm == 0.0 || x.is_empty() || y.is_empty() {
        return 0.0;
    }
    let Ok(r) = cross_correlate(x, y) else {
        return 0.0;
    };
    let peak = r.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    (peak / norm).min(1.0)
}

/// Life probability from the similarity of separated segments: similar
/// segments indicate a common (non-living) source.
///
/// `p = σ(k · (clamp(1 − s, 0, 1) − threshold))` with `s` the mean pairwise
/// peak correlation.
pub fn acoustic_correlation_detect<S: AsRef<[f64]>>(segments: &[S], threshold: f64) -> Result<f64> {
    ensure!(
        segments.len() >= 2,
        "need at least two segments, got {}",
        segments.len()
    );
    let len = segments[0].as_ref().len();
    ensure!(len >= 1, "segments must be non-empty");
    for (i, s) in segments.iter().enumerate() {
        ensure!(
            s.as_ref().len() == len,
            "segment {i} has length {}, expected {len}",
            s.as_ref().len()
        );
    }
    ensure!(threshold.is_finite(), "threshold must be finite");
    let mut total = 0.0;
    let mut pairs = 0usize;
    for i in 0..segments.len() {
        for j in i + 1..segments.len() {
            total += peak_correlation(segments[i].as_ref(), segments[j].as_ref());
            pairs += 1;
        }
    }
    let similarity = total / pairs as f64;
    let dissimilarity = (1.0 - similarity).clamp(0.0, 1.0);
    Ok(sigmoid(CORRELATION_SLOPE * (dissimilarity - threshold)))
}

/// Compact conv → LSTM → dense classifier for raw acoustic windows.
pub fn acoustic_classifier_config(window_len: usize, seed: u64) -> ClassifierConfig {
    ClassifierConfig {
        input_channels: 1,
        input_len: window_len,
        conv: vec![(4, 5), (4, 5)],
        lstm_hidden: 8,
        lstm_layers: 1,
        dense: vec![8],
        keep_prob: 1.0,
        seed,
    }
}

/// Splits a sampled signal into one window per presence step.
pub fn acoustic_windows(signal: &[f64], presence: &[u8], samples_per_step: usize) -> Result<Vec<(Vec<f64>, u8)>> {
    ensure!(samples_per_step >= 1, "samples per step must be at least 1");
    ensure!(
        signal.len() == presence.len() * samples_per_step,
        "signal has {} samples, expected {} steps of {samples_per_step}",
        signal.len(),
        presence.len()
    );
    Ok(signal
        .chunks_exact(samples_per_step)
        .zip(presence)
        .map(|(w, &y)| (w.to_vec(), y))
        .collect())
}

pub fn acoustic_cnn_detect(window: &[f64], model: &SequenceClassifier) -> Result<f64> {
    model.predict(window)
}
