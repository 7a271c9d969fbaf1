//! Per-sensor life-probability estimators.
//!
//! The UWB detector classifies windows of the clutter-suppressed slow-time
//! signal; the acoustic detectors either compare sub-band similarity or run
//! a small convolutional classifier. Infrared probabilities are ingested as
//! streams by the `lifefuse` crate.

mod acoustic;
mod uwb;

pub use crate::stream::ProbabilityStream;
pub use acoustic::{
    acoustic_classifier_config, acoustic_cnn_detect, acoustic_correlation_detect, acoustic_subbands, acoustic_windows,
    peak_correlation, CORRELATION_SLOPE, SUBBAND_WIDTHS,
};
pub use uwb::{
    synthetic_uwb_echo, uwb_detect, uwb_features, uwb_window_samples, UwbDetector, UwbDetectorConfig, UwbFeatures,
    UwbSample, UwbSynthConfig,
};
