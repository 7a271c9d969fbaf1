use alloc::vec::Vec;

use crate::dsp::{FusionSample, BRANCHES};
use crate::error::{ensure, Error, Result};

/// Belief mass over {life, none} plus the unassigned frame Θ.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MassFunction {
    pub life: f64,
    pub none: f64,
    pub theta: f64,
}

impl MassFunction {
    pub const VACUOUS: Self = Self {
        life: 0.0,
        none: 0.0,
        theta: 1.0,
    };

    pub fn new(life: f64, none: f64, theta: f64) -> Result<Self> {
        let m = Self { life, none, theta };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(
            [self.life, self.none, self.theta]
                .iter()
                .all(|v| v.is_finite() && *v >= 0.0),
            "masses must be non-negative, got {self:?}"
        );
        ensure!(
            (self.life + self.none + self.theta - 1.0).abs() <= 1e-9,
            "masses must sum to 1, got {}",
            self.life + self.none + self.theta
        );
        Ok(())
    }
}

/// Discounts a detection probability by the sensor's reliability `r`:
/// `(p·r, (1 − p)·r, 1 − r)`.
pub fn probability_to_mass(p: f64, reliability: f64) -> Result<MassFunction> {
    ensure!((0.0..=1.0).contains(&p), "probability {p} outside [0, 1]");
    ensure!(
        (0.0..=1.0).contains(&reliability),
        "reliability {reliability} outside [0, 1]"
    );
    Ok(MassFunction {
        life: p * reliability,
        none: (1.0 - p) * reliability,
        theta: 1.0 - reliability,
    })
}

/// Dempster's rule for two sources; also returns the conflict `K`.
pub fn ds_combine_pair(a: &MassFunction, b: &MassFunction) -> Result<(MassFunction, f64)> {
    let conflict = a.life * b.none + a.none * b.life;
    let norm = 1.0 - conflict;
    if norm <= 0.0 {
        return Err(Error::TotalConflict);
    }
    let life = a.life * b.life + a.life * b.theta + a.theta * b.life;
    let none = a.none * b.none + a.none * b.theta + a.theta * b.none;
    let theta = a.theta * b.theta;
    Ok((
        MassFunction {
            life: life / norm,
            none: none / norm,
            theta: theta / norm,
        },
        conflict,
    ))
}

/// Sequential pairwise combination of at least two sources.
pub fn ds_combine(masses: &[MassFunction]) -> Result<MassFunction> {
    ensure!(
        masses.len() >= 2,
        "need at least two mass functions, got {}",
        masses.len()
    );
    for m in masses {
        m.validate()?;
    }
    let mut acc = masses[0];
    for m in &masses[1..] {
        acc = ds_combine_pair(&acc, m)?.0;
    }
    Ok(acc)
}

/// Default per-sensor reliability of the baseline.
pub const DEFAULT_RELIABILITY: f64 = 0.9;

/// Combined belief in life from the three raw probabilities at the
/// window's last step.
pub fn ds_score(sample: &FusionSample, reliability: &[f64; BRANCHES]) -> Result<MassFunction> {
    let masses = sample
        .last_raw()
        .iter()
        .zip(reliability)
        .map(|(&p, &r)| probability_to_mass(p, r))
        .collect::<Result<Vec<_>>>()?;
    ds_combine(&masses)
}

/// Baseline scores (combined m(life)) for a set of windows.
pub fn ds_scores(samples: &[FusionSample], reliability: &[f64; BRANCHES]) -> Result<Vec<f64>> {
    samples
        .iter()
        .map(|s| ds_score(s, reliability).map(|m| m.life))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &MassFunction, b: &MassFunction, tol: f64) -> bool {
        (a.life - b.life).abs() < tol && (a.none - b.none).abs() < tol && (a.theta - b.theta).abs() < tol
    }

    #[test]
    fn mass_examples() {
        assert_eq!(probability_to_mass(0.3, 0.0).unwrap(), MassFunction::VACUOUS);
        assert_eq!(
            probability_to_mass(1.0, 1.0).unwrap(),
            MassFunction::new(1.0, 0.0, 0.0).unwrap()
        );
        let m = probability_to_mass(0.6, 0.9).unwrap();
        assert!(close(
            &m,
            &MassFunction {
                life: 0.54,
                none: 0.36,
                theta: 0.1
            },
            1e-12
        ));
        assert!(probability_to_mass(1.1, 0.9).is_err());
    }

    #[test]
    fn hand_computed_combination() {
        let a = MassFunction::new(0.6, 0.3, 0.1).unwrap();
        let b = MassFunction::new(0.7, 0.2, 0.1).unwrap();
        let (m, k) = ds_combine_pair(&a, &b).unwrap();
        assert!((k - 0.33).abs() < 1e-12);
        assert!(close(
            &m,
            &MassFunction {
                life: 0.8209,
                none: 0.1642,
                theta: 0.0149
            },
            1e-4
        ));
    }

    #[test]
    fn vacuous_is_identity_and_conflict_errors() {
        let a = MassFunction::new(0.2, 0.5, 0.3).unwrap();
        assert!(close(&ds_combine(&[a, MassFunction::VACUOUS]).unwrap(), &a, 1e-15));
        let life = MassFunction::new(1.0, 0.0, 0.0).unwrap();
        let none = MassFunction::new(0.0, 1.0, 0.0).unwrap();
        assert_eq!(ds_combine(&[life, none]), Err(Error::TotalConflict));
        assert!(ds_combine(&[a]).is_err());
    }
}
