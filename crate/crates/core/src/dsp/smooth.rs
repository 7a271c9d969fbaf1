use alloc::vec::Vec;

use crate::error::{ensure, Result};

/// Centred moving average of odd width `width`; windows shrink at the
/// sequence edges so the output keeps the input length.
pub fn moving_average(seq: &[f64], width: usize) -> Result<Vec<f64>> {
    ensure!(width >= 1, "smoothing width must be at least 1");
    ensure!(width % 2 == 1, "smoothing width must be odd, got {width}");
    let half = width / 2;
    let n = seq.len();
    Ok((0..n)
        .map(|i| {
            let window = &seq[i.saturating_sub(half)..(i + half + 1).min(n)];
            let (lo, hi) = window.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
            (window.iter().sum::<f64>() / window.len() as f64).clamp(lo, hi)
        })
        .collect())
}
