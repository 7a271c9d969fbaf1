use alloc::vec::Vec;

use crate::error::{ensure, Result};

/// Sensor order used everywhere a triple of streams or branches appears.
pub const SENSOR_NAMES: [&str; 3] = ["uwb", "infrared", "acoustic"];

/// Per-sensor life-probability time series with ground-truth labels.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProbabilityStream {
    pub timestamps: Vec<f64>,
    pub probs: Vec<f64>,
    pub labels: Vec<u8>,
}

impl ProbabilityStream {
    pub fn new(timestamps: Vec<f64>, probs: Vec<f64>, labels: Vec<u8>) -> Result<Self> {
        let stream = Self {
            timestamps,
            probs,
            labels,
        };
        stream.validate()?;
        Ok(stream)
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(
            self.timestamps.len() == self.probs.len() && self.probs.len() == self.labels.len(),
            "stream lengths differ: {} timestamps, {} probabilities, {} labels",
            self.timestamps.len(),
            self.probs.len(),
            self.labels.len()
        );
        for (i, p) in self.probs.iter().enumerate() {
            ensure!(
                p.is_finite() && (0.0..=1.0).contains(p),
                "probability {p} at step {i} is outside [0, 1]"
            );
        }
        for (i, y) in self.labels.iter().enumerate() {
            ensure!(*y <= 1, "label {y} at step {i} is not binary");
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// Three time-aligned sensor streams that share one clock and one label
/// sequence.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SensorStreams {
    pub timestamps: Vec<f64>,
    pub uwb: ProbabilityStream,
    pub infrared: ProbabilityStream,
    pub acoustic: ProbabilityStream,
}

impl SensorStreams {
    /// Builds the triple from raw columns.
    pub fn from_columns(
        timestamps: Vec<f64>,
        uwb: Vec<f64>,
        infrared: Vec<f64>,
        acoustic: Vec<f64>,
        labels: Vec<u8>,
    ) -> Result<Self> {
        let make = |probs: Vec<f64>| ProbabilityStream::new(timestamps.clone(), probs, labels.clone());
        let streams = Self {
            uwb: make(uwb)?,
            infrared: make(infrared)?,
            acoustic: make(acoustic)?,
            timestamps,
        };
        Ok(streams)
    }

    pub fn validate(&self) -> Result<()> {
        for s in self.sensors() {
            s.validate()?;
            ensure!(
                s.len() == self.timestamps.len(),
                "sensor stream length {} differs from clock length {}",
                s.len(),
                self.timestamps.len()
            );
            ensure!(s.labels == self.uwb.labels, "sensor streams disagree on labels");
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn labels(&self) -> &[u8] {
        &self.uwb.labels
    }

    /// Streams in [`SENSOR_NAMES`] order.
    pub fn sensors(&self) -> [&ProbabilityStream; 3] {
        [&self.uwb, &self.infrared, &self.acoustic]
    }
}
