//! Deterministic, seed-driven generators for UWB echoes, acoustic signals
//! and tri-sensor probability streams.

mod acoustic;
mod echo;
mod pulse;
mod scenario;

pub use acoustic::{simulate_acoustic, AcousticParams};
pub use echo::{simulate_echo_matrix, ClutterPath, EchoMatrix, HeartbeatMotion, UwbChannelModel, VitalPath};
pub use pulse::{generate_pulse, PulseKind, PulseWaveform};
pub use scenario::{simulate_probability_streams, InterferenceConfig, PresenceChain, ScenarioConfig, SensorProfile};
