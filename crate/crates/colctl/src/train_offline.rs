//! Offline training workflow: dataset in, checkpoint bundle and loss
//! curves out.

use std::path::PathBuf;

use sim_core::{ScenarioConfig, SlicingProfile};
use xapp_suite::{
    train_offline, ActionCatalogue, ActionSpec, AgentVariant, OfflineTrainConfig,
};

use crate::collect::load_dataset;
use crate::manifest::RunManifest;
use crate::runner::write_loss_csv;
use crate::ExperimentError;

pub struct TrainOfflineSpec {
    pub dataset: PathBuf,
    pub scenario: ScenarioConfig,
    pub variant: AgentVariant,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub workers: usize,
    pub max_updates: Option<u64>,
}

#[derive(Debug)]
pub struct TrainOfflineSummary {
    pub checkpoint: PathBuf,
    pub catalogue_path: PathBuf,
    pub loss_csv: PathBuf,
    pub updates: usize,
    pub stopped_on_plateau: bool,
}

/// The catalogue a variant trains on: the reduced-actions agent drops
/// every action using the reference slicing.
pub fn catalogue_for_variant(variant: AgentVariant) -> Result<ActionCatalogue, ExperimentError> {
    let base = ActionCatalogue::default_50();
    match variant {
        AgentVariant::DrlReducedActions => base
            .without_slicing(SlicingProfile::new(36, 3, 11))
            .map_err(|e| ExperimentError::Config(e.to_string())),
        _ => Ok(base),
    }
}

pub fn run_train_offline(spec: &TrainOfflineSpec) -> Result<TrainOfflineSummary, ExperimentError> {
    let ds = load_dataset(&spec.dataset)?;
    std::fs::create_dir_all(&spec.out_dir)
        .map_err(|e| ExperimentError::Runtime(e.to_string()))?;
    let catalogue = catalogue_for_variant(spec.variant)?;

    let manifest_path = spec.out_dir.join("manifest.json");
    let mut manifest = RunManifest::new(
        "train-offline",
        &spec.scenario,
        spec.seed,
        &format!(
            "variant={} workers={} dataset={}",
            spec.variant.name(),
            spec.workers,
            spec.dataset.display()
        ),
    );
    manifest.insert("workers", spec.workers as u64);
    manifest.insert("variant", spec.variant.name());
    manifest.write(&manifest_path)?;

    let mut cfg = OfflineTrainConfig {
        variant: spec.variant,
        workers: spec.workers,
        seed: spec.seed,
        ..Default::default()
    };
    if let Some(max) = spec.max_updates {
        cfg.max_updates = max;
        cfg.min_updates = cfg.min_updates.min(max);
    }

    let trained = train_offline(&ds, &spec.scenario, &catalogue, &cfg).map_err(|e| match e {
        xapp_suite::XappError::Coverage(g) => {
            ExperimentError::Config(format!("dataset missing required profile coverage: {g}"))
        }
        other => ExperimentError::Runtime(other.to_string()),
    })?;

    let checkpoint = spec.out_dir.join("model.ckpt");
    trained
        .bundle
        .save(&checkpoint)
        .map_err(|e| ExperimentError::Runtime(e.to_string()))?;

    let catalogue_path = spec.out_dir.join("catalogue.json");
    let specs: Vec<ActionSpec> = catalogue
        .actions()
        .iter()
        .map(|(s, p)| ActionSpec {
            prbs: s.prbs,
            sched: p.policy,
        })
        .collect();
    std::fs::write(
        &catalogue_path,
        serde_json::to_string_pretty(&specs).expect("catalogue serializes"),
    )
    .map_err(|e| ExperimentError::Runtime(e.to_string()))?;

    let loss_csv = spec.out_dir.join("loss.csv");
    write_loss_csv(&loss_csv, &trained.loss_rows)?;
    if !trained.ae_epoch_losses.is_empty() {
        let body: String = std::iter::once("epoch,mse".to_string())
            .chain(
                trained
                    .ae_epoch_losses
                    .iter()
                    .enumerate()
                    .map(|(i, l)| format!("{i},{l}")),
            )
            .collect::<Vec<_>>()
            .join("\n");
        std::fs::write(spec.out_dir.join("ae_loss.csv"), body + "\n")
            .map_err(|e| ExperimentError::Runtime(e.to_string()))?;
    }

    manifest.incomplete = false;
    manifest.insert("updates", trained.loss_rows.len() as u64);
    manifest.insert("stopped_on_plateau", trained.stopped_on_plateau);
    manifest.write(&manifest_path)?;

    Ok(TrainOfflineSummary {
        checkpoint,
        catalogue_path,
        loss_csv,
        updates: trained.loss_rows.len(),
        stopped_on_plateau: trained.stopped_on_plateau,
    })
}

/// Rebuilds the catalogue a checkpoint was trained against, preferring the
/// sidecar file written next to it.
pub fn catalogue_for_checkpoint(
    checkpoint: &std::path::Path,
    n_actions: usize,
) -> Result<ActionCatalogue, ExperimentError> {
    let sidecar = checkpoint.with_file_name("catalogue.json");
    if sidecar.exists() {
        let body = std::fs::read_to_string(&sidecar)
            .map_err(|e| ExperimentError::Config(e.to_string()))?;
        let specs: Vec<ActionSpec> =
            serde_json::from_str(&body).map_err(|e| ExperimentError::Config(e.to_string()))?;
        return ActionCatalogue::from_specs(&specs, 50)
            .map_err(|e| ExperimentError::Config(e.to_string()));
    }
    let base = ActionCatalogue::default_50();
    if n_actions == base.len() {
        return Ok(base);
    }
    let reduced = base
        .without_slicing(SlicingProfile::new(36, 3, 11))
        .map_err(|e| ExperimentError::Config(e.to_string()))?;
    if n_actions == reduced.len() {
        return Ok(reduced);
    }
    Err(ExperimentError::Config(format!(
        "checkpoint expects {n_actions} actions; no catalogue.json found and no default matches"
    )))
}
