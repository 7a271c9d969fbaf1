use alloc::vec::Vec;

use super::smooth::moving_average;
use crate::error::{ensure, Result};
use crate::stream::SensorStreams;

pub const BRANCHES: usize = 3;
/// Raw probability and smoothed probability.
pub const CHANNELS: usize = 2;

/// One fusion input: three sensors × (raw, smoothed) × G steps.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionSample {
    window: usize,
    /// Layout `[branch][channel][step]`.
    data: Vec<f64>,
    pub label: u8,
    /// Per-sample loss weight `w_n`.
    pub weight: f64,
    /// Index of the first stream step covered.
    pub start: usize,
}

impl FusionSample {
    pub fn new(window: usize, data: Vec<f64>, label: u8, weight: f64) -> Result<Self> {
        ensure!(window >= 1, "window must be at least 1");
        ensure!(
            data.len() == BRANCHES * CHANNELS * window,
            "fusion sample needs {} values, got {}",
            BRANCHES * CHANNELS * window,
            data.len()
        );
        ensure!(label <= 1, "label must be 0 or 1");
        ensure!(
            weight.is_finite() && weight >= 0.0,
            "sample weight must be non-negative"
        );
        Ok(Self {
            window,
            data,
            label,
            weight,
            start: 0,
        })
    }

    /// G.
    pub fn window(&self) -> usize {
        self.window
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// The `2 × G` block of one branch.
    pub fn branch(&self, branch: usize) -> &[f64] {
        let len = CHANNELS * self.window;
        &self.data[branch * len..(branch + 1) * len]
    }

    pub fn branch_mut(&mut self, branch: usize) -> &mut [f64] {
        let len = CHANNELS * self.window;
        &mut self.data[branch * len..(branch + 1) * len]
    }

    pub fn channel(&self, branch: usize, channel: usize) -> &[f64] {
        let start = (branch * CHANNELS + channel) * self.window;
        &self.data[start..start + self.window]
    }

    /// Raw probability of each sensor at the window's last step.
    pub fn last_raw(&self) -> [f64; BRANCHES] {
        core::array::from_fn(|b| self.channel(b, 0)[self.window - 1])
    }
}

/// Slides a G-wide window over the streams one step at a time.
///
/// Sample `k` covers steps `[k, k + G)`; channel 0 is the raw stream,
/// channel 1 the centred moving average of the full stream. The label is
/// the ground truth at the window's last step.
pub fn make_windows(streams: &SensorStreams, window: usize, smooth_width: usize) -> Result<Vec<FusionSample>> {
    let len = streams.len();
    ensure!(window >= 1, "window G must be at least 1");
    ensure!(len > window, "stream length {len} must exceed the window G = {window}");
    let raw = streams.sensors().map(|s| s.probs.as_slice());
    let smoothed: Vec<Vec<f64>> = raw
        .iter()
        .map(|p| moving_average(p, smooth_width))
        .collect::<Result<_>>()?;
    let labels = streams.labels();

    Ok((0..len - window)
        .map(|k| {
            let mut data = Vec::with_capacity(BRANCHES * CHANNELS * window);
            for b in 0..BRANCHES {
                data.extend_from_slice(&raw[b][k..k + window]);
                data.extend_from_slice(&smoothed[b][k..k + window]);
            }
            FusionSample {
                window,
                data,
                label: labels[k + window - 1],
                weight: 1.0,
                start: k,
            }
        })
        .collect())
}
