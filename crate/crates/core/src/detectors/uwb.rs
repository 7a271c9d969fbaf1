use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;

use crate::dsp::pca_clutter_suppress;
use crate::error::{ensure, Result};
use crate::math::{mean, sqrt, variance};
use crate::neural::{ClassifierConfig, FitConfig, FitHistory, SequenceClassifier};
use crate::rng::{derived_rng, stream};
use crate::sim::{
    generate_pulse, simulate_echo_matrix, ClutterPath, EchoMatrix, PulseKind, PulseWaveform, UwbChannelModel, VitalPath,
};
use crate::stream::ProbabilityStream;

/// Two-channel window: channel 0 the transmitted pulse train sampled at the
/// selected range bin, channel 1 the clutter-suppressed slow-time echo.
#[derive(Debug, Clone, PartialEq)]
pub struct UwbSample {
    /// `2 × L`, channel-major.
    pub channels: Vec<f64>,
    pub label: u8,
}

impl UwbSample {
    pub fn len(&self) -> usize {
        self.channels.len() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct UwbDetectorConfig {
    /// Slow-time steps per classified window.
    pub window: usize,
    pub pca_drop: usize,
    pub pca_keep: usize,
    pub conv: Vec<(usize, usize)>,
    pub lstm_hidden: usize,
    pub lstm_layers: usize,
    pub dense: Vec<usize>,
    pub keep_prob: f64,
    pub seed: u64,
}

impl Default for UwbDetectorConfig {
    fn default() -> Self {
        Self {
            window: 128,
            pca_drop: 1,
            pca_keep: 5,
            conv: vec![(8, 3), (8, 3)],
            lstm_hidden: 32,
            lstm_layers: 1,
            dense: vec![16],
            keep_prob: 1.0,
            seed: 0,
        }
    }
}

impl UwbDetectorConfig {
    pub fn classifier(&self) -> ClassifierConfig {
        ClassifierConfig {
            input_channels: 2,
            input_len: self.window,
            conv: self.conv.clone(),
            lstm_hidden: self.lstm_hidden,
            lstm_layers: self.lstm_layers,
            dense: self.dense.clone(),
            keep_prob: self.keep_prob,
            seed: self.seed,
        }
    }
}

/// Slow-time signals extracted from one echo matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct UwbFeatures {
    /// Range bin with the largest slow-time variance after suppression.
    pub bin: usize,
    /// Normalized transmitted pulse value at `bin`, one per slow-time step.
    pub reference: Vec<f64>,
    /// Clutter-suppressed slow-time signal at `bin`.
    pub echo: Vec<f64>,
}

pub fn uwb_features(echo: &EchoMatrix, pulse: &PulseWaveform, drop: usize, keep: usize) -> Result<UwbFeatures> {
    ensure!(!pulse.is_empty(), "empty pulse");
    let suppressed = pca_clutter_suppress(echo, drop, keep)?;
    let mut bin = 0;
    let mut best = f64::NEG_INFINITY;
    for c in 0..suppressed.cols() {
        let v = variance(&suppressed.column(c));
        if v > best {
            best = v;
            bin = c;
        }
    }
    let peak = pulse.samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let value = if peak > 0.0 {
        pulse.value_at(bin as f64 * echo.fast_interval) / peak
    } else {
        0.0
    };
    Ok(UwbFeatures {
        bin,
        reference: vec![value; echo.rows()],
        echo: suppressed.column(bin),
    })
}

/// Builds the classifier input for steps `[start, start + window)`; the echo
/// channel is z-scored within the window.
fn window_input(features: &UwbFeatures, start: usize, window: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * window);
    out.extend_from_slice(&features.reference[start..start + window]);
    let slice = &features.echo[start..start + window];
    let mu = mean(slice);
    let sd = sqrt(variance(slice));
    if sd > 0.0 {
        out.extend(slice.iter().map(|v| (v - mu) / sd));
    } else {
        out.extend(core::iter::repeat_n(0.0, window));
    }
    out
}

/// Every full window of an echo matrix, labelled by the ground truth at the
/// window's last step.
pub fn uwb_window_samples(
    echo: &EchoMatrix,
    pulse: &PulseWaveform,
    labels: &[u8],
    cfg: &UwbDetectorConfig,
    stride: usize,
) -> Result<Vec<UwbSample>> {
    ensure!(labels.len() == echo.rows(), "need one label per slow-time row");
    ensure!(stride >= 1, "stride must be at least 1");
    ensure!(
        cfg.window <= echo.rows(),
        "window {} exceeds the {} slow-time rows",
        cfg.window,
        echo.rows()
    );
    let features = uwb_features(echo, pulse, cfg.pca_drop, cfg.pca_keep)?;
    Ok((0..=echo.rows() - cfg.window)
        .step_by(stride)
        .map(|s| UwbSample {
            channels: window_input(&features, s, cfg.window),
            label: labels[s + cfg.window - 1],
        })
        .collect())
}

/// Geometry and noise of the synthetic presence/absence echoes.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct UwbSynthConfig {
    pub center_freq: f64,
    pub fast_interval: f64,
    pub pulse_len: usize,
    pub cols: usize,
    pub prf: f64,
    /// Chest-motion delay amplitude when a person is present.
    pub motion_amplitude: f64,
    pub breath_freq_range: (f64, f64),
    /// Micro-motion signal to noise ratio in dB.
    pub snr_db: f64,
}

impl Default for UwbSynthConfig {
    fn default() -> Self {
        Self {
            center_freq: 1e9,
            fast_interval: 50e-12,
            pulse_len: 32,
            cols: 64,
            prf: 20.0,
            motion_amplitude: 5e-12,
            breath_freq_range: (0.2, 0.4),
            snr_db: 10.0,
        }
    }
}

impl UwbSynthConfig {
    pub fn pulse(&self) -> Result<PulseWaveform> {
        generate_pulse(
            PulseKind::GaussianMonocycle,
            self.center_freq,
            self.fast_interval,
            self.pulse_len,
        )
    }

    fn channel(&self, motion: f64, breath_freq: f64, noise_std: f64) -> UwbChannelModel {
        UwbChannelModel {
            vital: VitalPath {
                amplitude: 0.5,
                base_delay: 1.0e-9,
                motion_amplitude: motion,
                breath_freq,
                heartbeat: None,
            },
            clutter: vec![ClutterPath {
                amplitude: 1.0,
                delay: 0.3e-9,
            }],
            noise_std,
        }
    }
}

/// Simulates `rows` pulses with a breathing target (`present`) or an empty
/// scene. The noise level is set from the present-case micro-motion power so
/// both classes share it.
pub fn synthetic_uwb_echo(present: bool, rows: usize, cfg: &UwbSynthConfig, seed: u64) -> Result<EchoMatrix> {
    let pulse = cfg.pulse()?;
    let (lo, hi) = cfg.breath_freq_range;
    ensure!(
        0.0 < lo && lo <= hi,
        "breath frequency range must be positive and ordered"
    );
    let mut rng = derived_rng(seed, stream::SENSOR);
    let breath = if hi > lo { rng.random_range(lo..hi) } else { lo };
    let ts = 1.0 / cfg.prf;

    let clean = simulate_echo_matrix(
        &cfg.channel(cfg.motion_amplitude, breath, 0.0),
        &pulse,
        rows,
        cfg.cols,
        ts,
        seed,
    )?;
    let signal_var = (0..clean.cols())
        .map(|c| variance(&clean.column(c)))
        .fold(0.0, f64::max);
    ensure!(signal_var > 0.0, "motion amplitude produces no slow-time variation");
    let noise_std = sqrt(signal_var) / libm::pow(10.0, cfg.snr_db / 20.0);

    let motion = if present { cfg.motion_amplitude } else { 0.0 };
    simulate_echo_matrix(
        &cfg.channel(motion, breath, noise_std),
        &pulse,
        rows,
        cfg.cols,
        ts,
        seed,
    )
}

/// A trained UWB window classifier together with its preprocessing.
#[derive(Debug, Clone, PartialEq)]
pub struct UwbDetector {
    config: UwbDetectorConfig,
    model: SequenceClassifier,
}

impl UwbDetector {
    /// Untrained detector with seeded initial weights.
    pub fn new(config: UwbDetectorConfig) -> Result<Self> {
        let model = SequenceClassifier::new(config.classifier())?;
        Ok(Self { config, model })
    }

    pub fn from_parts(config: UwbDetectorConfig, model: SequenceClassifier) -> Result<Self> {
        ensure!(
            model.config() == &config.classifier(),
            "model architecture does not match the detector configuration"
        );
        Ok(Self { config, model })
    }

    pub fn config(&self) -> &UwbDetectorConfig {
        &self.config
    }

    pub fn model(&self) -> &SequenceClassifier {
        &self.model
    }

    pub fn model_mut(&mut self) -> &mut SequenceClassifier {
        &mut self.model
    }

    pub fn fit(&mut self, train: &[UwbSample], valid: &[UwbSample], fit: &FitConfig) -> Result<FitHistory> {
        let pairs = |s: &[UwbSample]| s.iter().map(|u| (u.channels.clone(), u.label)).collect::<Vec<_>>();
        self.model.fit(&pairs(train), &pairs(valid), fit)
    }

    pub fn predict(&self, sample: &UwbSample) -> Result<f64> {
        self.model.predict(&sample.channels)
    }
}

/// One probability per slow-time step; the first `window − 1` steps have no
/// full window and are reported as 0.5.
pub fn uwb_detect(
    echo: &EchoMatrix,
    pulse: &PulseWaveform,
    detector: &UwbDetector,
    window: usize,
    labels: &[u8],
) -> Result<ProbabilityStream> {
    let cfg = &detector.config;
    ensure!(
        window == cfg.window,
        "model was trained on windows of {} steps, asked for {window}",
        cfg.window
    );
    ensure!(
        window <= echo.rows(),
        "window {window} exceeds the {} slow-time rows",
        echo.rows()
    );
    ensure!(labels.len() == echo.rows(), "need one label per slow-time row");
    let features = uwb_features(echo, pulse, cfg.pca_drop, cfg.pca_keep)?;
    let mut probs = vec![0.5; window - 1];
    for start in 0..=echo.rows() - window {
        probs.push(detector.model.predict(&window_input(&features, start, window))?);
    }
    let timestamps = (0..echo.rows()).map(|m| m as f64 * echo.slow_interval).collect();
    ProbabilityStream::new(timestamps, probs, labels.to_vec())
}
