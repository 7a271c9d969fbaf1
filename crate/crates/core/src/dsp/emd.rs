use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::abs;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum EnvelopeKind {
    #[default]
    CubicSpline,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvelopeSide {
    Upper,
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct EmdConfig {
    pub max_imfs: usize,
    /// Sifting stops once `Σ(h_prev − h)² / Σh_prev²` falls below this
    /// value and the candidate passes [`is_imf`] at the same tolerance.
    pub sift_sd_threshold: f64,
    pub max_sift_iters: usize,
    pub envelope: EnvelopeKind,
}

impl Default for EmdConfig {
    fn default() -> Self {
        Self {
            max_imfs: 10,
            sift_sd_threshold: 0.3,
            max_sift_iters: 100,
            envelope: EnvelopeKind::CubicSpline,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmdResult {
    /// Highest frequency first.
    pub imfs: Vec<Vec<f64>>,
    pub residual: Vec<f64>,
    /// Sifting iterations spent on each IMF.
    pub sift_iterations: Vec<usize>,
    /// Whether each IMF was cut off by `max_sift_iters`.
    pub capped: Vec<bool>,
}

impl EmdResult {
    /// `Σ imfs + residual`.
    pub fn reconstruct(&self) -> Vec<f64> {
        let mut out = self.residual.clone();
        for imf in &self.imfs {
            for (o, v) in out.iter_mut().zip(imf) {
                *o += v;
            }
        }
        out
    }
}

pub fn local_maxima(x: &[f64]) -> Vec<usize> {
    (1..x.len().saturating_sub(1))
        .filter(|&i| x[i - 1] < x[i] && x[i] >= x[i + 1])
        .collect()
}

pub fn local_minima(x: &[f64]) -> Vec<usize> {
    (1..x.len().saturating_sub(1))
        .filter(|&i| x[i - 1] > x[i] && x[i] <= x[i + 1])
        .collect()
}

/// Sign changes, skipping exact zeros.
pub fn count_zero_crossings(x: &[f64]) -> usize {
    let mut count = 0;
    let mut prev = 0.0;
    for &v in x {
        if v != 0.0 {
            if prev != 0.0 && (v > 0.0) != (prev > 0.0) {
                count += 1;
            }
            prev = v;
        }
    }
    count
}

pub fn is_monotone(x: &[f64]) -> bool {
    x.windows(2).all(|w| w[1] >= w[0]) || x.windows(2).all(|w| w[1] <= w[0])
}

fn linear_interp(xs: &[f64], ys: &[f64], len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut seg = 0;
    for i in 0..len {
        let t = i as f64;
        while seg + 2 < xs.len() && t > xs[seg + 1] {
            seg += 1;
        }
        let (x0, x1) = (xs[seg], xs[seg + 1]);
        let w = (t - x0) / (x1 - x0);
        out.push(ys[seg] * (1.0 - w) + ys[seg + 1] * w);
    }
    out
}

/// Natural cubic spline through `(xs, ys)` evaluated at `0..len`.
fn natural_spline(xs: &[f64], ys: &[f64], len: usize) -> Vec<f64> {
    let k = xs.len();
    if k < 3 {
        return linear_interp(xs, ys, len);
    }
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    // Tridiagonal system for interior second derivatives.
    let inner = k - 2;
    let mut diag = vec![0.0; inner];
    let mut upper = vec![0.0; inner];
    let mut rhs = vec![0.0; inner];
    for j in 0..inner {
        let i = j + 1;
        diag[j] = 2.0 * (h[i - 1] + h[i]);
        upper[j] = h[i];
        rhs[j] = 6.0 * ((ys[i + 1] - ys[i]) / h[i] - (ys[i] - ys[i - 1]) / h[i - 1]);
    }
    for j in 1..inner {
        let w = h[j] / diag[j - 1];
        diag[j] -= w * upper[j - 1];
        rhs[j] -= w * rhs[j - 1];
    }
    let mut second = vec![0.0; k];
    for j in (0..inner).rev() {
        let next = if j + 1 < inner { second[j + 2] } else { 0.0 };
        second[j + 1] = (rhs[j] - upper[j] * next) / diag[j];
    }

    let mut out = Vec::with_capacity(len);
    let mut seg = 0;
    for i in 0..len {
        let t = i as f64;
        while seg + 2 < k && t > xs[seg + 1] {
            seg += 1;
        }
        let hs = h[seg];
        let a = (xs[seg + 1] - t) / hs;
        let b = (t - xs[seg]) / hs;
        out.push(
            a * ys[seg]
                + b * ys[seg + 1]
                + ((a * a * a - a) * second[seg] + (b * b * b - b) * second[seg + 1]) * hs * hs / 6.0,
        );
    }
    out
}

/// Envelope through the local extrema of one side.
///
/// Both signal endpoints are added as knots. When interior extrema exist,
/// an endpoint knot takes the more extreme of the endpoint sample and the
/// nearest extremum's value, which mirrors that extremum onto the boundary.
pub fn envelope(signal: &[f64], side: EnvelopeSide, kind: EnvelopeKind) -> Result<Vec<f64>> {
    let n = signal.len();
    if n < 2 {
        return Err(Error::DegenerateSignal(format!(
            "envelope needs at least 2 samples, got {n}"
        )));
    }
    let extrema = match side {
        EnvelopeSide::Upper => local_maxima(signal),
        EnvelopeSide::Lower => local_minima(signal),
    };
    let pick = |a: f64, b: f64| match side {
        EnvelopeSide::Upper => a.max(b),
        EnvelopeSide::Lower => a.min(b),
    };
    let (first, last) = (signal[0], signal[n - 1]);
    let (left, right) = match (extrema.first(), extrema.last()) {
        (Some(&i), Some(&j)) => (pick(first, signal[i]), pick(last, signal[j])),
        _ => (first, last),
    };

    let mut xs = Vec::with_capacity(extrema.len() + 2);
    let mut ys = Vec::with_capacity(extrema.len() + 2);
    xs.push(0.0);
    ys.push(left);
    for &i in &extrema {
        xs.push(i as f64);
        ys.push(signal[i]);
    }
    xs.push((n - 1) as f64);
    ys.push(right);

    Ok(match kind {
        EnvelopeKind::Linear => linear_interp(&xs, &ys, n),
        EnvelopeKind::CubicSpline => natural_spline(&xs, &ys, n),
    })
}

fn envelope_mean(signal: &[f64], kind: EnvelopeKind) -> Vec<f64> {
    let upper = envelope(signal, EnvelopeSide::Upper, kind).expect("length checked by caller");
    let lower = envelope(signal, EnvelopeSide::Lower, kind).expect("length checked by caller");
    upper.iter().zip(&lower).map(|(u, l)| 0.5 * (u + l)).collect()
}

/// Both IMF conditions: extrema and zero-crossing counts differ by at most
/// one, and the cubic envelope mean stays within `tol · max|signal|`.
pub fn is_imf(signal: &[f64], tol: f64) -> bool {
    if signal.len() < 4 {
        return false;
    }
    let extrema = local_maxima(signal).len() + local_minima(signal).len();
    let crossings = count_zero_crossings(signal);
    if extrema.abs_diff(crossings) > 1 {
        return false;
    }
    let peak = signal.iter().fold(0.0f64, |m, v| m.max(abs(*v)));
    let mean = envelope_mean(signal, EnvelopeKind::CubicSpline);
    mean.iter().all(|m| abs(*m) <= tol * peak)
}

fn extrema_count(x: &[f64]) -> usize {
    local_maxima(x).len() + local_minima(x).len()
}

/// Empirical mode decomposition by repeated sifting.
///
/// Extraction stops when the residual is monotone, has fewer than three
/// extrema, or `max_imfs` components have been taken.
pub fn emd_decompose(signal: &[f64], cfg: &EmdConfig) -> Result<EmdResult> {
    if signal.len() < 8 {
        return Err(Error::invalid(format!(
            "EMD needs at least 8 samples, got {}",
            signal.len()
        )));
    }
    if cfg.max_imfs < 1 || cfg.max_sift_iters < 1 || !(cfg.sift_sd_threshold > 0.0) {
        return Err(Error::invalid(
            "EMD config needs max_imfs >= 1, max_sift_iters >= 1 and a positive threshold",
        ));
    }

    let mut residual = signal.to_vec();
    let mut result = EmdResult {
        imfs: Vec::new(),
        residual: Vec::new(),
        sift_iterations: Vec::new(),
        capped: Vec::new(),
    };

    while result.imfs.len() < cfg.max_imfs {
        if is_monotone(&residual) || extrema_count(&residual) < 3 {
            break;
        }
        let mut h = residual.clone();
        let mut iterations = 0;
        let mut capped = true;
        while iterations < cfg.max_sift_iters {
            let mean = envelope_mean(&h, cfg.envelope);
            let energy: f64 = h.iter().map(|v| v * v).sum();
            let change: f64 = mean.iter().map(|m| m * m).sum();
            for (v, m) in h.iter_mut().zip(&mean) {
                *v -= m;
            }
            iterations += 1;
            let sd = if energy > 0.0 { change / energy } else { 0.0 };
            if sd < cfg.sift_sd_threshold && is_imf(&h, cfg.sift_sd_threshold) {
                capped = false;
                break;
            }
        }
        for (r, v) in residual.iter_mut().zip(&h) {
            *r -= v;
        }
        result.imfs.push(h);
        result.sift_iterations.push(iterations);
        result.capped.push(capped);
    }
    result.residual = residual;
    Ok(result)
}
