//! Experiment orchestration: the workflows behind the `colctl` CLI.

pub mod analyze;
pub mod collect;
pub mod evaluate;
pub mod manifest;
pub mod runner;
pub mod train_offline;
pub mod train_online;

pub use analyze::{run_analyze, AnalyzeSpec, AnalyzeSummary};
pub use collect::{load_dataset, run_collect, CollectSpec, CollectSummary};
pub use evaluate::{
    run_evaluate, run_greedy_arm, run_static_arm, ArmResult, EvaluateSpec, EvaluateSummary,
};
pub use manifest::RunManifest;
pub use train_offline::{
    catalogue_for_checkpoint, catalogue_for_variant, run_train_offline, TrainOfflineSpec,
    TrainOfflineSummary,
};
pub use train_online::{run_train_online, TrainOnlineSpec, TrainOnlineSummary};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    /// Bad arguments, missing files, invalid scenario: exit code 2.
    #[error("config error: {0}")]
    Config(String),
    /// Failures during an otherwise valid run: exit code 3.
    #[error("runtime failure: {0}")]
    Runtime(String),
}

impl ExperimentError {
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Config(_) => 2,
            ExperimentError::Runtime(_) => 3,
        }
    }
}

/// Loads a scenario file, or the default scenario when no path is given.
pub fn load_scenario(
    path: Option<&std::path::Path>,
) -> Result<sim_core::ScenarioConfig, ExperimentError> {
    match path {
        None => Ok(sim_core::ScenarioConfig::default()),
        Some(p) => {
            let body = std::fs::read_to_string(p)
                .map_err(|e| ExperimentError::Config(format!("{}: {e}", p.display())))?;
            sim_core::ScenarioConfig::from_toml_str(&body)
                .map_err(|e| ExperimentError::Config(e.to_string()))
        }
    }
}
