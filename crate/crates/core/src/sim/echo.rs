use alloc::vec::Vec;

use rand_distr::{Distribution, Normal};

use super::pulse::PulseWaveform;
use crate::error::{ensure, Result};
use crate::math::{sin, PI};
use crate::rng::{derived_rng, stream};

/// Optional second delay modulation standing in for heartbeat micro-motion.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HeartbeatMotion {
    /// Peak delay excursion in seconds.
    pub motion_amplitude: f64,
    pub freq: f64,
}

/// The reflection off a breathing body: delay `τ0 + A·sin(2π f_b t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VitalPath {
    pub amplitude: f64,
    /// Seconds.
    pub base_delay: f64,
    /// Seconds.
    pub motion_amplitude: f64,
    /// Hz.
    pub breath_freq: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub heartbeat: Option<HeartbeatMotion>,
}

impl VitalPath {
    /// Delay of the vital path at slow time `t`.
    pub fn delay_at(&self, t: f64) -> f64 {
        let mut d = self.base_delay + self.motion_amplitude * sin(2.0 * PI * self.breath_freq * t);
        if let Some(hb) = self.heartbeat {
            d += hb.motion_amplitude * sin(2.0 * PI * hb.freq * t);
        }
        d
    }

    fn max_excursion(&self) -> f64 {
        self.motion_amplitude + self.heartbeat.map_or(0.0, |h| h.motion_amplitude)
    }
}

/// A static reflector at a fixed delay.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClutterPath {
    pub amplitude: f64,
    pub delay: f64,
}

/// Discrete multipath channel: one vital path plus static clutter.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct UwbChannelModel {
    pub vital: VitalPath,
    pub clutter: Vec<ClutterPath>,
    pub noise_std: f64,
}

impl UwbChannelModel {
    /// Validates the model against a slow-time interval (1/PRF).
    pub fn validate(&self, slow_interval: f64) -> Result<()> {
        let v = &self.vital;
        ensure!(v.amplitude.is_finite(), "vital path amplitude is not finite");
        ensure!(
            v.motion_amplitude.is_finite() && v.motion_amplitude >= 0.0,
            "motion amplitude must be non-negative"
        );
        let nyquist = 0.5 / slow_interval;
        ensure!(
            v.breath_freq > 0.0 && v.breath_freq < nyquist,
            "breath frequency {} Hz must lie in (0, PRF/2 = {} Hz)",
            v.breath_freq,
            nyquist
        );
        if let Some(hb) = v.heartbeat {
            ensure!(
                hb.motion_amplitude >= 0.0 && hb.freq > 0.0 && hb.freq < nyquist,
                "heartbeat motion must have non-negative amplitude and frequency in (0, PRF/2)"
            );
        }
        for (i, c) in self.clutter.iter().enumerate() {
            ensure!(
                c.amplitude.is_finite() && c.delay.is_finite(),
                "clutter path {} is not finite",
                i + 1
            );
        }
        ensure!(
            self.noise_std.is_finite() && self.noise_std >= 0.0,
            "noise std must be non-negative"
        );
        Ok(())
    }
}

/// Slow-time × fast-time echo matrix, row-major with one row per pulse.
#[derive(Debug, Clone, PartialEq)]
pub struct EchoMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    /// Slow-time interval T_s (1/PRF), seconds.
    pub slow_interval: f64,
    /// Fast-time interval T_f, seconds.
    pub fast_interval: f64,
}

impl EchoMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>, slow_interval: f64, fast_interval: f64) -> Result<Self> {
        ensure!(
            rows >= 2 && cols >= 2,
            "echo matrix must be at least 2x2, got {rows}x{cols}"
        );
        ensure!(
            data.len() == rows * cols,
            "echo matrix data has {} values, expected {}",
            data.len(),
            rows * cols
        );
        ensure!(
            data.iter().all(|v| v.is_finite()),
            "echo matrix contains non-finite values"
        );
        ensure!(
            slow_interval > 0.0 && fast_interval > 0.0,
            "sample intervals must be positive"
        );
        Ok(Self {
            rows,
            cols,
            data,
            slow_interval,
            fast_interval,
        })
    }

    /// Number of slow-time samples (M).
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of fast-time samples (N).
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    /// Slow-time signal at one range bin.
    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, col)).collect()
    }

    /// Returns a matrix with the same intervals and new contents.
    pub fn with_data(&self, data: Vec<f64>) -> Result<Self> {
        Self::new(self.rows, self.cols, data, self.slow_interval, self.fast_interval)
    }
}

/// Simulates `rows` pulses of `cols` fast-time samples each.
///
/// Row `m` holds the vital path delayed by `τ1(m·T_s)`, every clutter path
/// at its fixed delay and white Gaussian noise. Fractional delays use linear
/// interpolation of the pulse.
pub fn simulate_echo_matrix(
    channel: &UwbChannelModel,
    pulse: &PulseWaveform,
    rows: usize,
    cols: usize,
    slow_interval: f64,
    seed: u64,
) -> Result<EchoMatrix> {
    ensure!(
        rows >= 2 && cols >= 2,
        "echo matrix must be at least 2x2, got {rows}x{cols}"
    );
    ensure!(
        slow_interval.is_finite() && slow_interval > 0.0,
        "slow-time interval must be positive"
    );
    channel.validate(slow_interval)?;
    let tf = pulse.sample_interval;
    let window = (cols - 1) as f64 * tf;
    ensure!(
        pulse.duration() < cols as f64 * tf,
        "pulse of {} samples does not fit in {} fast-time samples",
        pulse.len(),
        cols
    );

    let check_path = |index: usize, min_delay: f64, max_delay: f64| -> Result<()> {
        ensure!(
            min_delay >= 0.0 && max_delay + pulse.duration() <= window + 1e-6 * tf,
            "path {index} delay range [{min_delay:e}, {max_delay:e}] s exceeds the fast-time window of {window:e} s"
        );
        Ok(())
    };
    let v = &channel.vital;
    check_path(0, v.base_delay - v.max_excursion(), v.base_delay + v.max_excursion())?;
    for (i, c) in channel.clutter.iter().enumerate() {
        check_path(i + 1, c.delay, c.delay)?;
    }

    // Static clutter contributes one fixed row.
    let clutter_row: Vec<f64> = (0..cols)
        .map(|n| {
            let t = n as f64 * tf;
            channel
                .clutter
                .iter()
                .map(|c| c.amplitude * pulse.value_at(t - c.delay))
                .sum()
        })
        .collect();

    let mut rng = derived_rng(seed, stream::NOISE);
    let noise = if channel.noise_std > 0.0 {
        Some(Normal::new(0.0, channel.noise_std).expect("validated noise std"))
    } else {
        None
    };

    let mut data = Vec::with_capacity(rows * cols);
    for m in 0..rows {
        let delay = v.delay_at(m as f64 * slow_interval);
        for (n, clutter) in clutter_row.iter().enumerate() {
            let t = n as f64 * tf;
            let mut value = v.amplitude * pulse.value_at(t - delay) + clutter;
            if let Some(dist) = &noise {
                value += dist.sample(&mut rng);
            }
            data.push(value);
        }
    }
    EchoMatrix::new(rows, cols, data, slow_interval, tf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::pulse::{generate_pulse, PulseKind};
    use alloc::vec;

    fn pulse() -> PulseWaveform {
        generate_pulse(PulseKind::GaussianMonocycle, 1e9, 50e-12, 32).unwrap()
    }

    fn channel(a: f64, clutter: Vec<ClutterPath>, noise: f64) -> UwbChannelModel {
        UwbChannelModel {
            vital: VitalPath {
                amplitude: 0.5,
                base_delay: 1.0e-9,
                motion_amplitude: a,
                breath_freq: 0.3,
                heartbeat: None,
            },
            clutter,
            noise_std: noise,
        }
    }

    #[test]
    fn static_channel_rows_identical() {
        let e = simulate_echo_matrix(&channel(0.0, vec![], 0.0), &pulse(), 16, 64, 0.05, 1).unwrap();
        for m in 1..16 {
            assert_eq!(e.row(m), e.row(0));
        }
    }

    #[test]
    fn delay_outside_window_names_path() {
        let far = vec![ClutterPath {
            amplitude: 1.0,
            delay: 10e-9,
        }];
        let err = simulate_echo_matrix(&channel(0.0, far, 0.0), &pulse(), 4, 64, 0.05, 1).unwrap_err();
        assert!(alloc::format!("{err}").contains("path 1"));
    }

    #[test]
    fn breath_frequency_must_be_below_nyquist() {
        let mut ch = channel(5e-12, vec![], 0.0);
        ch.vital.breath_freq = 11.0;
        assert!(simulate_echo_matrix(&ch, &pulse(), 4, 64, 0.05, 1).is_err());
    }

    #[test]
    fn same_seed_same_matrix() {
        let ch = channel(5e-12, vec![], 0.1);
        let a = simulate_echo_matrix(&ch, &pulse(), 8, 64, 0.05, 9).unwrap();
        let b = simulate_echo_matrix(&ch, &pulse(), 8, 64, 0.05, 9).unwrap();
        let c = simulate_echo_matrix(&ch, &pulse(), 8, 64, 0.05, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
