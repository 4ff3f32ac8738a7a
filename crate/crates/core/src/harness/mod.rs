//! Experiment orchestration: configuration, seeded trials, SNR sweeps and
//! CSV output.

pub mod config;
pub mod seeds;
pub mod sweep;
pub mod trial;

pub use config::{ClusterPower, Mode, ScenarioConfig};
pub use sweep::{emit_csv, run_sweep, write_csv, write_metadata, write_traces, SweepResult, SweepRow};
pub use trial::{draw_network, run_trial, Outcome, TrialNetwork, TrialRecord};
