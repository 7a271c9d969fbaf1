use alloc::vec;

use super::tensor::Tensor;
use crate::error::{ensure, Result};
use crate::math::ln;

/// Floor applied to each logarithm argument in the weighted BCE.
pub const BCE_CLIP: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum LossKind {
    #[default]
    WeightedBce,
    Mse,
}

impl LossKind {
    /// Per-sample loss and derivative with respect to the prediction.
    pub fn term(self, pred: f64, target: f64, weight: f64) -> (f64, f64) {
        match self {
            LossKind::WeightedBce => bce_term(pred, target, weight),
            LossKind::Mse => {
                let d = pred - target;
                (weight * d * d, 2.0 * weight * d)
            }
        }
    }
}

/// `l = −w [y ln x + (1 − y) ln(1 − x)]` with each log argument floored at
/// [`BCE_CLIP`]. The weight is a constant: no gradient flows into it.
#[inline]
pub fn bce_term(pred: f64, target: f64, weight: f64) -> (f64, f64) {
    let mut loss = 0.0;
    let mut grad = 0.0;
    if target != 0.0 {
        let x = pred.max(BCE_CLIP);
        loss -= target * ln(x);
        if pred > BCE_CLIP {
            grad -= target / pred;
        }
    }
    if target != 1.0 {
        let x = (1.0 - pred).max(BCE_CLIP);
        loss -= (1.0 - target) * ln(x);
        if 1.0 - pred > BCE_CLIP {
            grad += (1.0 - target) / (1.0 - pred);
        }
    }
    (weight * loss, weight * grad)
}

/// Mean weighted BCE over a batch and its gradient with respect to `pred`.
pub fn weighted_bce(pred: &Tensor, target: &Tensor, weight: &Tensor) -> Result<(f64, Tensor)> {
    ensure!(
        pred.len() == target.len() && pred.len() == weight.len(),
        "prediction, target and weight lengths differ: {}, {}, {}",
        pred.len(),
        target.len(),
        weight.len()
    );
    ensure!(!pred.is_empty(), "empty batch");
    for (i, &y) in target.values().iter().enumerate() {
        ensure!(y == 0.0 || y == 1.0, "target {y} at index {i} is not 0 or 1");
    }
    for (i, &w) in weight.values().iter().enumerate() {
        ensure!(w >= 0.0, "weight {w} at index {i} is negative");
    }
    let n = pred.len() as f64;
    let mut total = 0.0;
    let mut grad = vec![0.0; pred.len()];
    for (i, ((&x, &y), &w)) in pred
        .values()
        .iter()
        .zip(target.values())
        .zip(weight.values())
        .enumerate()
    {
        let (l, g) = bce_term(x, y, w);
        total += l;
        grad[i] = g / n;
    }
    Ok((total / n, Tensor::new(pred.shape().to_vec(), grad)?))
}

/// Mean squared error and its gradient.
pub fn mse(pred: &Tensor, target: &Tensor) -> Result<(f64, Tensor)> {
    ensure!(
        pred.shape() == target.shape(),
        "shape mismatch: {:?} vs {:?}",
        pred.shape(),
        target.shape()
    );
    ensure!(!pred.is_empty(), "empty input");
    let n = pred.len() as f64;
    let mut total = 0.0;
    let grad = pred
        .values()
        .iter()
        .zip(target.values())
        .map(|(p, t)| {
            let d = p - t;
            total += d * d;
            2.0 * d / n
        })
        .collect();
    Ok((total / n, Tensor::new(pred.shape().to_vec(), grad)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bce(x: f64, y: f64, w: f64) -> f64 {
        weighted_bce(
            &Tensor::from_slice(&[x]),
            &Tensor::from_slice(&[y]),
            &Tensor::from_slice(&[w]),
        )
        .unwrap()
        .0
    }

    #[test]
    fn hand_values() {
        assert_eq!(bce(1.0, 1.0, 1.0), 0.0);
        assert_eq!(bce(0.0, 0.0, 1.0), 0.0);
        assert!((bce(0.5, 1.0, 1.0) - core::f64::consts::LN_2).abs() < 1e-12);
        assert!((bce(0.5, 0.0, 2.0) - 2.0 * core::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn clipped_log_stays_finite() {
        let l = bce(0.0, 1.0, 1.0);
        assert!((l + BCE_CLIP.ln()).abs() < 1e-12);
    }

    #[test]
    fn non_binary_target_rejected() {
        let r = weighted_bce(
            &Tensor::from_slice(&[0.5]),
            &Tensor::from_slice(&[0.3]),
            &Tensor::from_slice(&[1.0]),
        );
        assert!(r.is_err());
    }

    #[test]
    fn mse_examples() {
        let m = |p: &[f64], t: &[f64]| mse(&Tensor::from_slice(p), &Tensor::from_slice(t)).unwrap().0;
        assert_eq!(m(&[0.3, 0.4], &[0.3, 0.4]), 0.0);
        assert_eq!(m(&[1.0], &[0.0]), 1.0);
        assert!((m(&[0.2, 0.8], &[0.0, 1.0]) - 0.04).abs() < 1e-15);
        assert!(mse(&Tensor::from_slice(&[1.0]), &Tensor::from_slice(&[1.0, 2.0])).is_err());
    }
}
