use alloc::vec::Vec;

use crate::error::{ensure, Result};

/// `r_xy(m)` at every lag with non-empty overlap.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSeries {
    /// From `-(len(x) - 1)` to `len(y) - 1`.
    pub lags: Vec<i64>,
    pub values: Vec<f64>,
}

impl CorrelationSeries {
    pub fn at(&self, lag: i64) -> Option<f64> {
        let first = *self.lags.first()?;
        let idx = usize::try_from(lag - first).ok()?;
        self.values.get(idx).copied()
    }
}

/// `r_xy(m) = Σ_n x(n) y(n + m)` with both sequences zero outside their
/// support.
pub fn cross_correlate(x: &[f64], y: &[f64]) -> Result<CorrelationSeries> {
    ensure!(
        !x.is_empty() && !y.is_empty(),
        "cross-correlation needs non-empty inputs"
    );
    let (nx, ny) = (x.len() as i64, y.len() as i64);
    let lags: Vec<i64> = (-(nx - 1)..ny).collect();
    let values = lags
        .iter()
        .map(|&m| {
            // n in [max(0, -m), min(nx, ny - m))
            let lo = 0.max(-m) as usize;
            let hi = nx.min(ny - m) as usize;
            if lo >= hi {
                return 0.0;
            }
            let ys = &y[(lo as i64 + m) as usize..(hi as i64 + m) as usize];
            crate::math::dot(&x[lo..hi], ys)
        })
        .collect();
    Ok(CorrelationSeries { lags, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn small_hand_case() {
        let r = cross_correlate(&[1.0, 2.0], &[1.0, 2.0]).unwrap();
        assert_eq!(r.lags, vec![-1, 0, 1]);
        assert_eq!(r.values, vec![2.0, 5.0, 2.0]);
    }

    #[test]
    fn zeros_and_impulses() {
        let r = cross_correlate(&[0.0; 5], &[1.0, -2.0, 3.0]).unwrap();
        assert!(r.values.iter().all(|&v| v == 0.0));
        let r = cross_correlate(&[1.0, 0.0, 0.0], &[1.0, 0.0, 0.0]).unwrap();
        for (&m, &v) in r.lags.iter().zip(&r.values) {
            assert_eq!(v, if m == 0 { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn zero_lag_is_energy() {
        let x = [0.5, -1.5, 2.0, 3.0];
        let r = cross_correlate(&x, &x).unwrap();
        assert_eq!(r.at(0), Some(0.25 + 2.25 + 4.0 + 9.0));
        assert_eq!(r.values.len(), 2 * x.len() - 1);
    }

    #[test]
    fn empty_input_rejected() {
        assert!(cross_correlate(&[], &[1.0]).is_err());
    }
}
