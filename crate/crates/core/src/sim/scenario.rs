use alloc::vec::Vec;

use rand::Rng as _;
use rand_distr::{Beta, Distribution};

use crate::error::{ensure, Result};
use crate::rng::{derived_rng, stream, Rng};
use crate::stream::SensorStreams;

/// Two-state (absent/present) Markov chain for the hidden ground truth.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct PresenceChain {
    pub stay_present: f64,
    pub stay_absent: f64,
    /// `None` draws the first state from the stationary distribution.
    #[cfg_attr(feature = "serde", serde(default))]
    pub initial_present: Option<bool>,
}

/// How one sensor's probability output behaves.
///
/// Outputs are Beta-distributed with a state-dependent mean and the given
/// concentration (`α + β`). During an interference episode the mean is 0.5
/// regardless of state.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct SensorProfile {
    pub mean_prob_present: f64,
    pub mean_prob_absent: f64,
    pub concentration: f64,
    /// Expected fraction of time spent in interference episodes.
    pub interference_rate: f64,
}

/// Interference episodes are scheduled on fixed blocks of `episode_steps`.
/// With `exclusive` set, at most one sensor is degraded per block.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct InterferenceConfig {
    pub episode_steps: usize,
    pub exclusive: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct ScenarioConfig {
    /// Seconds.
    pub duration: f64,
    /// Seconds per stream step.
    pub step_seconds: f64,
    pub presence: PresenceChain,
    /// Profiles in uwb, infrared, acoustic order.
    pub sensors: [SensorProfile; 3],
    pub interference: InterferenceConfig,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    /// The standard scenario: 1000 one-second steps, clean sensors of
    /// differing quality.
    fn default() -> Self {
        Self {
            duration: 1000.0,
            step_seconds: 1.0,
            presence: PresenceChain {
                stay_present: 0.98,
                stay_absent: 0.98,
                initial_present: None,
            },
            sensors: [
                SensorProfile {
                    mean_prob_present: 0.7,
                    mean_prob_absent: 0.3,
                    concentration: 4.0,
                    interference_rate: 0.0,
                },
                SensorProfile {
                    mean_prob_present: 0.65,
                    mean_prob_absent: 0.3,
                    concentration: 4.0,
                    interference_rate: 0.0,
                },
                SensorProfile {
                    mean_prob_present: 0.65,
                    mean_prob_absent: 0.35,
                    concentration: 4.0,
                    interference_rate: 0.0,
                },
            ],
            interference: InterferenceConfig {
                episode_steps: 25,
                exclusive: true,
            },
            seed: 0,
        }
    }
}

impl ScenarioConfig {
    /// Standard scenario where each sensor spends `rate` of the time in
    /// interference, never overlapping with another sensor's episodes.
    pub fn interference(rate: f64) -> Self {
        let mut cfg = Self::default();
        for s in &mut cfg.sensors {
            s.interference_rate = rate;
        }
        cfg.interference.exclusive = true;
        cfg
    }

    pub fn steps(&self) -> usize {
        libm::round(self.duration / self.step_seconds) as usize
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(
            self.duration.is_finite() && self.duration > 0.0,
            "duration must be positive"
        );
        ensure!(
            self.step_seconds.is_finite() && self.step_seconds > 0.0,
            "step_seconds must be positive"
        );
        ensure!(self.steps() >= 1, "scenario yields no steps");
        let unit = |name: &str, v: f64| -> Result<()> {
            ensure!((0.0..=1.0).contains(&v), "{name} = {v} is outside [0, 1]");
            Ok(())
        };
        unit("presence.stay_present", self.presence.stay_present)?;
        unit("presence.stay_absent", self.presence.stay_absent)?;
        let mut total_rate = 0.0;
        for (i, s) in self.sensors.iter().enumerate() {
            unit(&alloc::format!("sensors[{i}].mean_prob_present"), s.mean_prob_present)?;
            unit(&alloc::format!("sensors[{i}].mean_prob_absent"), s.mean_prob_absent)?;
            unit(&alloc::format!("sensors[{i}].interference_rate"), s.interference_rate)?;
            ensure!(
                s.concentration.is_finite() && s.concentration > 0.0,
                "sensors[{i}].concentration must be positive"
            );
            total_rate += s.interference_rate;
        }
        ensure!(
            self.interference.episode_steps >= 1,
            "interference.episode_steps must be at least 1"
        );
        ensure!(
            !self.interference.exclusive || total_rate <= 1.0 + 1e-12,
            "exclusive interference needs rates summing to at most 1, got {total_rate}"
        );
        Ok(())
    }
}

/// Draws a probability with the given mean and concentration.
fn draw_probability(rng: &mut Rng, mean: f64, concentration: f64) -> f64 {
    if mean <= 0.0 || mean >= 1.0 {
        return mean.clamp(0.0, 1.0);
    }
    let beta = Beta::new(mean * concentration, (1.0 - mean) * concentration).expect("validated Beta parameters");
    beta.sample(rng).clamp(0.0, 1.0)
}

fn presence_sequence(chain: &PresenceChain, steps: usize, rng: &mut Rng) -> Vec<u8> {
    let leave_absent = 1.0 - chain.stay_absent;
    let leave_present = 1.0 - chain.stay_present;
    let stationary_present = if leave_absent + leave_present > 0.0 {
        leave_absent / (leave_absent + leave_present)
    } else {
        0.5
    };
    let mut present = match chain.initial_present {
        Some(p) => p,
        None => rng.random::<f64>() < stationary_present,
    };
    let mut labels = Vec::with_capacity(steps);
    for k in 0..steps {
        if k > 0 {
            let stay = if present { chain.stay_present } else { chain.stay_absent };
            if rng.random::<f64>() >= stay {
                present = !present;
            }
        }
        labels.push(present as u8);
    }
    labels
}

/// Per-sensor interference masks.
fn interference_masks(cfg: &ScenarioConfig, steps: usize, rng: &mut Rng) -> [Vec<bool>; 3] {
    let mut masks = [
        alloc::vec![false; steps],
        alloc::vec![false; steps],
        alloc::vec![false; steps],
    ];
    let block = cfg.interference.episode_steps;
    for start in (0..steps).step_by(block) {
        let end = (start + block).min(steps);
        if cfg.interference.exclusive {
            let u = rng.random::<f64>();
            let mut acc = 0.0;
            for (i, s) in cfg.sensors.iter().enumerate() {
                acc += s.interference_rate;
                if u < acc {
                    masks[i][start..end].fill(true);
                    break;
                }
            }
        } else {
            for (i, s) in cfg.sensors.iter().enumerate() {
                if rng.random::<f64>() < s.interference_rate {
                    masks[i][start..end].fill(true);
                }
            }
        }
    }
    masks
}

/// Samples a hidden presence sequence and three sensor probability streams.
pub fn simulate_probability_streams(cfg: &ScenarioConfig) -> Result<SensorStreams> {
    cfg.validate()?;
    let steps = cfg.steps();
    let labels = presence_sequence(&cfg.presence, steps, &mut derived_rng(cfg.seed, stream::PRESENCE));
    let masks = interference_masks(cfg, steps, &mut derived_rng(cfg.seed, stream::INTERFERENCE));

    let mut columns: [Vec<f64>; 3] = Default::default();
    for (i, profile) in cfg.sensors.iter().enumerate() {
        let mut rng = derived_rng(cfg.seed, stream::SENSOR + i as u64);
        columns[i] = labels
            .iter()
            .zip(&masks[i])
            .map(|(&y, &jammed)| {
                let mean = if jammed {
                    0.5
                } else if y == 1 {
                    profile.mean_prob_present
                } else {
                    profile.mean_prob_absent
                };
                draw_probability(&mut rng, mean, profile.concentration)
            })
            .collect();
    }
    let timestamps = (0..steps).map(|k| k as f64 * cfg.step_seconds).collect();
    let [uwb, infrared, acoustic] = columns;
    SensorStreams::from_columns(timestamps, uwb, infrared, acoustic, labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn absorbing_present_chain_gives_all_ones() {
        let mut cfg = ScenarioConfig::default();
        cfg.presence = PresenceChain {
            stay_present: 1.0,
            stay_absent: 1.0,
            initial_present: Some(true),
        };
        let s = simulate_probability_streams(&cfg).unwrap();
        assert!(s.labels().iter().all(|&y| y == 1));
    }

    #[test]
    fn deterministic_per_seed() {
        let cfg = ScenarioConfig::interference(0.2);
        let a = simulate_probability_streams(&cfg).unwrap();
        let b = simulate_probability_streams(&cfg).unwrap();
        assert_eq!(a, b);
        let mut other = cfg.clone();
        other.seed = 1;
        assert_ne!(simulate_probability_streams(&other).unwrap(), a);
    }

    #[test]
    fn exclusive_interference_never_overlaps() {
        let cfg = ScenarioConfig::interference(0.2);
        let masks = interference_masks(&cfg, 10_000, &mut derived_rng(3, stream::INTERFERENCE));
        for k in 0..10_000 {
            assert!(masks.iter().filter(|m| m[k]).count() <= 1);
        }
        for m in &masks {
            let frac = m.iter().filter(|&&b| b).count() as f64 / 10_000.0;
            assert!((frac - 0.2).abs() < 0.05, "fraction {frac}");
        }
    }

    #[test]
    fn rejects_invalid_config() {
        let mut cfg = ScenarioConfig::default();
        cfg.sensors[1].concentration = 0.0;
        assert!(simulate_probability_streams(&cfg).is_err());
        let mut cfg = ScenarioConfig::interference(0.5);
        cfg.interference.exclusive = true;
        assert!(cfg.validate().is_err());
        let mut cfg = ScenarioConfig::default();
        cfg.presence.stay_absent = 1.5;
        assert!(cfg.validate().is_err());
    }
}
