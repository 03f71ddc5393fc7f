//! Deterministic discrete-time emulator of sliced cellular base stations.
//!
//! A cell serves three slices (eMBB, MTC, URLLC) on one carrier. Control
//! consists of a PRB split across slices plus a per-slice scheduling policy
//! (RR, WF or PF); telemetry is a per-UE KPM record emitted every reporting
//! window. Cells are pure state machines over a seeded RNG: the same
//! configuration, seed and control sequence always produce bit-identical
//! KPM streams.

pub mod cell;
pub mod channel;
pub mod config;
pub mod kpm;
pub mod sched;
pub mod slice;
pub mod traffic;

pub use cell::{build_cell, CellCounters, CellState, UeState};
pub use channel::{cqi_to_mcs, tb_size, BITS_PER_PRB, SYMBOLS_PER_PRB};
pub use config::{ChannelConfig, ScenarioConfig, TrafficProfile, TrafficRates, UplinkConfig};
pub use kpm::{KpmRecord, TRACKED_METRICS};
pub use sched::{schedule_slice, SchedUe};
pub use slice::{SchedPolicy, SchedulingProfile, SliceId, SlicingProfile};
pub use traffic::TrafficSource;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid config: {field}: {reason}")]
    Config { field: String, reason: String },
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("invalid argument: {0}")]
    Argument(String),
}

impl SimError {
    pub fn config(field: &str, reason: &str) -> Self {
        SimError::Config {
            field: field.to_string(),
            reason: reason.to_string(),
        }
    }
}
