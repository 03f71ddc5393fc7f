//! Dataset collection: each catalogue action runs as its own paired
//! experiment (fresh cells, identical seed) through the full E2 loop, with
//! a discarded warmup before recording.

use std::path::{Path, PathBuf};

use data_factory::{DatasetWriter, RowContext};
use ric_nrt::{RicConfig, XappEvent};
use sim_core::ScenarioConfig;
use xapp_suite::ActionCatalogue;

use crate::manifest::RunManifest;
use crate::runner::build_loop;
use crate::ExperimentError;

pub struct CollectSpec {
    pub scenario: ScenarioConfig,
    pub catalogue: ActionCatalogue,
    pub out_dir: PathBuf,
    /// Total simulated seconds across the whole sweep.
    pub duration_s: u64,
    pub seed: u64,
    /// Windows discarded after each profile switch.
    pub warmup_windows: u64,
}

#[derive(Debug)]
pub struct CollectSummary {
    pub dataset_path: PathBuf,
    pub manifest_path: PathBuf,
    pub rows: u64,
    pub windows: u64,
    pub dwell_windows: u64,
}

pub fn run_collect(spec: &CollectSpec) -> Result<CollectSummary, ExperimentError> {
    if spec.duration_s == 0 {
        return Err(ExperimentError::Config("duration must be positive".into()));
    }
    spec.scenario
        .validate()
        .map_err(|e| ExperimentError::Config(e.to_string()))?;
    std::fs::create_dir_all(&spec.out_dir)
        .map_err(|e| ExperimentError::Runtime(e.to_string()))?;

    let period = spec.scenario.reporting_period_ms;
    let total_windows = spec.duration_s * 1000 / period;
    let dwell = (total_windows / spec.catalogue.len() as u64).max(1);

    let manifest_path = spec.out_dir.join("manifest.json");
    let mut manifest = RunManifest::new(
        "collect",
        &spec.scenario,
        spec.seed,
        &format!("duration={} warmup={}", spec.duration_s, spec.warmup_windows),
    );
    manifest.insert("actions", spec.catalogue.len() as u64);
    manifest.insert("dwell_windows", dwell);
    manifest.write(&manifest_path)?;

    let dataset_path = spec.out_dir.join("dataset.csv");
    let mut writer = DatasetWriter::create(&dataset_path, 256)
        .map_err(|e| ExperimentError::Runtime(e.to_string()))?;
    let mut windows_written = 0u64;

    let mut scenario = spec.scenario.clone();
    scenario.rng_seed = spec.seed;

    for (slicing, scheduling) in spec.catalogue.actions() {
        let mut loop_ = build_loop(&scenario, RicConfig::default())?;
        let xapp = loop_.ric.attach_xapp("collector");
        loop_
            .subscribe_all(xapp, period)
            .map_err(|e| ExperimentError::Runtime(e.to_string()))?;
        for bs in loop_.ric.registry().bs_ids() {
            loop_
                .send_control(xapp, bs, *slicing, *scheduling)
                .map_err(|e| ExperimentError::Runtime(e.to_string()))?;
        }
        let ctx = RowContext {
            slicing: *slicing,
            scheduling: *scheduling,
        };
        let total = spec.warmup_windows + dwell;
        let mut seen_per_bs = vec![0u64; scenario.n_bs as usize];
        while seen_per_bs.iter().any(|&w| w < total) {
            loop_.step_ms();
            while let Some(ev) = loop_.poll_xapp(xapp) {
                if let XappEvent::Indication { bs_id, records, .. } = ev {
                    let seen = &mut seen_per_bs[bs_id as usize];
                    *seen += 1;
                    if *seen > spec.warmup_windows && *seen <= total {
                        writer
                            .write_records(&records, &ctx)
                            .map_err(|e| ExperimentError::Runtime(e.to_string()))?;
                        windows_written += 1;
                    }
                }
            }
        }
    }

    let rows = writer.rows_written;
    writer
        .finish()
        .map_err(|e| ExperimentError::Runtime(e.to_string()))?;

    manifest.incomplete = false;
    manifest.insert("rows", rows);
    manifest.insert("windows", windows_written);
    manifest.insert(
        "rows_per_window",
        spec.scenario.total_ues_per_bs() as u64,
    );
    manifest.write(&manifest_path)?;

    Ok(CollectSummary {
        dataset_path,
        manifest_path,
        rows,
        windows: windows_written,
        dwell_windows: dwell,
    })
}

/// Loads a dataset written by [`run_collect`].
pub fn load_dataset(path: &Path) -> Result<data_factory::Dataset, ExperimentError> {
    data_factory::Dataset::read_csv(path).map_err(|e| ExperimentError::Config(e.to_string()))
}
