use alloc::vec::Vec;

use rand_distr::{Distribution, Normal};

use crate::error::{ensure, Result};
use crate::math::{exp, sin, PI};
use crate::rng::{derived_rng, stream};

/// Parameters of the synthetic acoustic channel.
///
/// A trapped person produces periodic taps at `tap_rate` plus a weak
/// respiration tone at `breath_freq`; both are present only while the
/// presence label is 1. Noise is always present.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct AcousticParams {
    pub breath_freq: f64,
    pub tap_rate: f64,
    pub noise_std: f64,
    pub sample_rate: f64,
    /// Duration of one presence step in seconds.
    pub step_seconds: f64,
    pub tap_amplitude: f64,
    pub breath_amplitude: f64,
    /// Gaussian tap width in seconds.
    pub tap_width: f64,
}

impl Default for AcousticParams {
    fn default() -> Self {
        Self {
            breath_freq: 0.25,
            tap_rate: 2.0,
            noise_std: 0.1,
            sample_rate: 200.0,
            step_seconds: 1.0,
            tap_amplitude: 1.0,
            breath_amplitude: 0.3,
            tap_width: 0.01,
        }
    }
}

impl AcousticParams {
    /// Clean-signal value at time `t` while a person is present.
    pub fn clean_value(&self, t: f64) -> f64 {
        let period = 1.0 / self.tap_rate;
        // distance to the nearest tap instant k·period
        let phase = t - libm::round(t / period) * period;
        let tap = self.tap_amplitude * exp(-0.5 * (phase / self.tap_width) * (phase / self.tap_width));
        tap + self.breath_amplitude * sin(2.0 * PI * self.breath_freq * t)
    }

    /// Mean power of the clean signal over one tap period, estimated on the
    /// sample grid. Used to set the noise level for a target SNR.
    pub fn clean_power(&self) -> f64 {
        let n = (self.sample_rate * self.step_seconds).max(1.0) as usize * 8;
        let dt = 1.0 / self.sample_rate;
        (0..n)
            .map(|i| {
                let v = self.clean_value(i as f64 * dt);
                v * v
            })
            .sum::<f64>()
            / n as f64
    }
}

/// Synthesizes `presence.len() · sample_rate · step_seconds` samples.
pub fn simulate_acoustic(presence: &[u8], params: &AcousticParams, seed: u64) -> Result<Vec<f64>> {
    let p = params;
    ensure!(
        p.breath_freq > 0.0 && p.tap_rate > 0.0,
        "breath and tap frequencies must be positive"
    );
    ensure!(
        p.sample_rate > 2.0 * p.breath_freq.max(p.tap_rate),
        "sample rate {} Hz violates Nyquist for max({}, {}) Hz",
        p.sample_rate,
        p.breath_freq,
        p.tap_rate
    );
    ensure!(
        p.noise_std.is_finite() && p.noise_std >= 0.0,
        "noise std must be non-negative"
    );
    ensure!(
        p.step_seconds > 0.0 && p.tap_width > 0.0,
        "step duration and tap width must be positive"
    );
    ensure!(presence.iter().all(|&y| y <= 1), "presence labels must be 0 or 1");

    let per_step = libm::round(p.sample_rate * p.step_seconds) as usize;
    ensure!(per_step >= 1, "a step must contain at least one sample");
    let dt = 1.0 / p.sample_rate;
    let noise = (p.noise_std > 0.0).then(|| Normal::new(0.0, p.noise_std).expect("validated std"));
    let mut rng = derived_rng(seed, stream::NOISE);

    let mut out = Vec::with_capacity(presence.len() * per_step);
    for (k, &y) in presence.iter().enumerate() {
        for j in 0..per_step {
            let i = k * per_step + j;
            let mut v = if y == 1 { p.clean_value(i as f64 * dt) } else { 0.0 };
            if let Some(d) = &noise {
                v += d.sample(&mut rng);
            }
            out.push(v);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn silence_without_presence_or_noise() {
        let p = AcousticParams {
            noise_std: 0.0,
            ..Default::default()
        };
        let x = simulate_acoustic(&[0, 0, 0], &p, 1).unwrap();
        assert_eq!(x.len(), 600);
        assert!(x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn nyquist_violation_rejected() {
        let p = AcousticParams {
            sample_rate: 3.0,
            ..Default::default()
        };
        assert!(simulate_acoustic(&[1], &p, 1).is_err());
    }

    #[test]
    fn deterministic_per_seed() {
        let p = AcousticParams::default();
        let y = vec![1, 0, 1, 1];
        assert_eq!(
            simulate_acoustic(&y, &p, 5).unwrap(),
            simulate_acoustic(&y, &p, 5).unwrap()
        );
    }
}
