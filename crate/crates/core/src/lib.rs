//! Multi-sensor life detection: synthetic UWB/acoustic/infrared sources,
//! classical preprocessing, hand-derived CNN+LSTM layers and a three-branch
//! decision-level fusion network with a Dempster-Shafer baseline.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, reports and
//! the command-line driver live in the `lifefuse` crate.

#![no_std]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod detectors;
pub mod dsp;
mod error;
pub mod fusion;
pub mod math;
pub mod neural;
pub mod rng;
pub mod sim;
mod stream;

pub use error::{Error, Result};
pub use stream::{ProbabilityStream, SensorStreams, SENSOR_NAMES};
