//! The xApp suite: a joint slicing+scheduling controller, a per-slice
//! scheduling controller and an online trainer, plus the shared machinery
//! they stand on (action catalogue, rewards, observation assembly, offline
//! replay training).

pub mod catalogue;
pub mod config;
pub mod metrics;
pub mod observe;
pub mod offline;
pub mod online;
pub mod replay;
pub mod reward;
pub mod sched;
pub mod sched_slicing;

pub use catalogue::{ActionCatalogue, ActionSpec, DEFAULT_SCHEDS, DEFAULT_SLICINGS};
pub use config::XappFileConfig;
pub use metrics::{MetricsLog, MetricsRow, METRICS_HEADER};
pub use observe::{
    joint_state, joint_state_dim, slice_state, slice_state_dim, NormRefs, ObsMetrics,
    ObservationAssembler,
};
pub use offline::{autoencoder_samples, train_offline, OfflineTrainConfig, TrainedModel};
pub use online::{OnlineConfig, OnlineStep, OnlineTrainerXapp, UpdateRow};
pub use replay::{dataset_windows, ReplayConfig, ReplayEnv};
pub use reward::{aggregate, RewardSpec, SchedRewardSpec, SliceWindow, WindowAggregate};
pub use sched::{SchedXapp, SCHED_ACTIONS};
pub use sched_slicing::{AgentVariant, SchedSlicingXapp};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum XappError {
    #[error("model error: {0}")]
    Ml(#[from] ml_kit::MlError),
    #[error("dataset missing required profile coverage: {0}")]
    Coverage(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}
