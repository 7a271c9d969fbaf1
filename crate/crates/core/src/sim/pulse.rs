use alloc::vec::Vec;

use crate::error::{ensure, Result};
use crate::math::{abs, exp, PI};

/// Transmitted pulse shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum PulseKind {
    /// First derivative of a Gaussian.
    #[default]
    GaussianMonocycle,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseWaveform {
    pub samples: Vec<f64>,
    /// Fast-time sample interval in seconds.
    pub sample_interval: f64,
}

impl PulseWaveform {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Time span from first to last sample.
    pub fn duration(&self) -> f64 {
        (self.samples.len() - 1) as f64 * self.sample_interval
    }

    /// Linearly interpolated value at time `t` after the first sample; zero
    /// outside the support.
    pub fn value_at(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        let pos = t / self.sample_interval;
        let i = pos as usize;
        if i + 1 >= self.samples.len() {
            return if i + 1 == self.samples.len() && pos == i as f64 {
                self.samples[i]
            } else {
                0.0
            };
        }
        let frac = pos - i as f64;
        self.samples[i] * (1.0 - frac) + self.samples[i + 1] * frac
    }
}

/// Samples a pulse centred in a window of `length` samples and normalizes
/// its peak absolute amplitude to one.
///
/// For the monocycle the spectral peak sits at `center_freq`, which fixes
/// the Gaussian width at `1 / (2π f_c)`.
pub fn generate_pulse(kind: PulseKind, center_freq: f64, sample_interval: f64, length: usize) -> Result<PulseWaveform> {
    ensure!(length >= 2, "pulse length must be at least 2, got {length}");
    ensure!(
        center_freq.is_finite() && center_freq > 0.0,
        "center frequency must be positive, got {center_freq}"
    );
    ensure!(
        sample_interval.is_finite() && sample_interval > 0.0,
        "sample interval must be positive, got {sample_interval}"
    );

    let sigma = 1.0 / (2.0 * PI * center_freq);
    let mid = (length - 1) as f64 / 2.0;
    let mut samples: Vec<f64> = (0..length)
        .map(|i| {
            let u = (i as f64 - mid) * sample_interval / sigma;
            let g = exp(-0.5 * u * u);
            match kind {
                PulseKind::Gaussian => g,
                PulseKind::GaussianMonocycle => -u * g,
            }
        })
        .collect();

    let peak = samples.iter().fold(0.0f64, |m, s| m.max(abs(*s)));
    ensure!(
        peak > 0.0 && peak.is_finite(),
        "pulse underflows for the requested parameters"
    );
    for s in &mut samples {
        *s /= peak;
    }
    Ok(PulseWaveform {
        samples,
        sample_interval,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_is_positive_with_unit_peak() {
        let p = generate_pulse(PulseKind::Gaussian, 1e9, 50e-12, 64).unwrap();
        assert!(p.samples.iter().all(|&s| s > 0.0));
        let peak = p.samples.iter().cloned().fold(f64::MIN, f64::max);
        assert!((peak - 1.0).abs() < 1e-15);
    }

    #[test]
    fn monocycle_is_odd_with_one_crossing() {
        let p = generate_pulse(PulseKind::GaussianMonocycle, 1e9, 50e-12, 64).unwrap();
        let sum: f64 = p.samples.iter().sum();
        assert!(sum.abs() < 1e-6);
        let (imax, _) = p
            .samples
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |b, (i, &v)| if v > b.1 { (i, v) } else { b });
        let (imin, _) = p
            .samples
            .iter()
            .enumerate()
            .fold((0, f64::MAX), |b, (i, &v)| if v < b.1 { (i, v) } else { b });
        let (lo, hi) = (imin.min(imax), imin.max(imax));
        let crossings = p.samples[lo..=hi]
            .windows(2)
            .filter(|w| w[0].signum() != w[1].signum())
            .count();
        assert_eq!(crossings, 1);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(generate_pulse(PulseKind::Gaussian, 0.0, 1e-12, 8).is_err());
        assert!(generate_pulse(PulseKind::Gaussian, 1e9, -1.0, 8).is_err());
        assert!(generate_pulse(PulseKind::Gaussian, 1e9, 1e-12, 1).is_err());
    }

    #[test]
    fn interpolates_between_samples() {
        let p = PulseWaveform {
            samples: alloc::vec![0.0, 1.0, -1.0],
            sample_interval: 2.0,
        };
        assert_eq!(p.value_at(1.0), 0.5);
        assert_eq!(p.value_at(3.0), 0.0);
        assert_eq!(p.value_at(4.0), -1.0);
        assert_eq!(p.value_at(4.5), 0.0);
        assert_eq!(p.value_at(-0.1), 0.0);
    }
}
