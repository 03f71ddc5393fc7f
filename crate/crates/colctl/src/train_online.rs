//! Online training workflow: resume a checkpoint against a live cell,
//! explore, log convergence metrics, and append a final greedy evaluation.

use std::io::Write;
use std::path::PathBuf;

use ml_kit::ModelBundle;
use ric_nrt::{ControlOutcome, RicConfig, XappEvent};
use sim_core::ScenarioConfig;
use xapp_suite::{
    AgentVariant, NormRefs, ObsMetrics, ObservationAssembler, OnlineConfig, OnlineTrainerXapp,
    RewardSpec,
};

use crate::evaluate::{run_greedy_arm, ArmResult};
use crate::manifest::RunManifest;
use crate::runner::{build_loop, write_loss_csv};
use crate::train_offline::catalogue_for_checkpoint;
use crate::ExperimentError;

pub struct TrainOnlineSpec {
    pub scenario: ScenarioConfig,
    pub checkpoint_in: PathBuf,
    pub out_dir: PathBuf,
    pub seed: u64,
    /// Exploration budget in simulated seconds (stops earlier on plateau).
    pub duration_s: u64,
    pub rollout_len: usize,
    /// Steps per action-histogram block.
    pub histogram_block: usize,
    /// Simulated seconds for the appended greedy evaluation run.
    pub post_eval_s: u64,
}

#[derive(Debug)]
pub struct TrainOnlineSummary {
    pub checkpoint_out: PathBuf,
    pub updates: u64,
    pub stopped_on_plateau: bool,
    pub explore_windows: usize,
    /// Per-window eMBB slice rate during exploration.
    pub explore_embb_rate: Vec<f64>,
    pub explore_cell_rate: Vec<f64>,
    pub post: ArmResult,
}

pub fn run_train_online(spec: &TrainOnlineSpec) -> Result<TrainOnlineSummary, ExperimentError> {
    if spec.duration_s == 0 {
        return Err(ExperimentError::Config("duration must be positive".into()));
    }
    if !spec.checkpoint_in.exists() {
        return Err(ExperimentError::Config(format!(
            "checkpoint {} does not exist",
            spec.checkpoint_in.display()
        )));
    }
    std::fs::create_dir_all(&spec.out_dir)
        .map_err(|e| ExperimentError::Runtime(e.to_string()))?;
    let bundle = ModelBundle::load(&spec.checkpoint_in)
        .map_err(|e| ExperimentError::Config(e.to_string()))?;
    let catalogue = catalogue_for_checkpoint(&spec.checkpoint_in, bundle.agent.n_actions())?;

    let mut scenario = spec.scenario.clone();
    scenario.rng_seed = spec.seed;

    let manifest_path = spec.out_dir.join("manifest.json");
    let mut manifest = RunManifest::new(
        "train-online",
        &scenario,
        spec.seed,
        &format!(
            "checkpoint={} duration={}",
            spec.checkpoint_in.display(),
            spec.duration_s
        ),
    );
    manifest.write(&manifest_path)?;

    let checkpoint_out = spec.out_dir.join("model_online.ckpt");
    let online_cfg = OnlineConfig {
        rollout_len: spec.rollout_len,
        checkpoint_path: Some(checkpoint_out.clone()),
        ..Default::default()
    };
    let reward_spec = RewardSpec::from_scenario(&scenario);
    let assembler =
        ObservationAssembler::new(ObsMetrics::RateBufferTbs, NormRefs::from_scenario(&scenario));
    let mut trainer = OnlineTrainerXapp::new(
        bundle.agent,
        bundle.autoencoder,
        catalogue.clone(),
        assembler,
        reward_spec,
        online_cfg,
        (scenario.default_slicing, scenario.default_scheduling),
    )
    .map_err(|e| ExperimentError::Config(e.to_string()))?;

    let mut loop_ = build_loop(&scenario, RicConfig::default())?;
    let xapp = loop_.ric.attach_xapp("online-training");
    loop_
        .subscribe_all(xapp, scenario.reporting_period_ms)
        .map_err(|e| ExperimentError::Runtime(e.to_string()))?;

    let mut explore_embb_rate = Vec::new();
    let mut explore_cell_rate = Vec::new();
    let end = loop_.now_ms() + spec.duration_s * 1000;
    'explore: while loop_.now_ms() < end {
        loop_.step_ms();
        while let Some(ev) = loop_.poll_xapp(xapp) {
            match ev {
                XappEvent::Indication { bs_id, records, .. } => {
                    let agg = xapp_suite::aggregate(&records);
                    explore_embb_rate.push(agg.per_slice[0].dl_rate_bps);
                    explore_cell_rate
                        .push(agg.per_slice.iter().map(|s| s.dl_rate_bps).sum::<f64>());
                    let prev = trainer.current_profiles();
                    let out = trainer
                        .on_indication(&records)
                        .map_err(|e| ExperimentError::Runtime(e.to_string()))?;
                    if let Some((slicing, scheduling)) = out.control {
                        loop_
                            .send_control(xapp, bs_id, slicing, scheduling)
                            .map_err(|e| ExperimentError::Runtime(e.to_string()))?;
                        // The harness acks within the same millisecond.
                        while let Some(XappEvent::ControlResult { outcome, .. }) =
                            loop_.poll_xapp(xapp)
                        {
                            if !matches!(
                                outcome,
                                ControlOutcome::Acked(e2_lite::ControlStatus::Ok)
                            ) {
                                trainer.on_control_result(false, prev);
                            }
                        }
                    }
                    if out.stopped {
                        break 'explore;
                    }
                }
                XappEvent::ControlResult { .. } => {}
                _ => {}
            }
        }
    }

    trainer
        .save_bundle(&checkpoint_out)
        .map_err(|e| ExperimentError::Runtime(e.to_string()))?;
    write_loss_csv(&spec.out_dir.join("during.csv"), &trainer.update_rows)?;
    trainer
        .metrics
        .write_csv(&spec.out_dir.join("explore_metrics.csv"))
        .map_err(|e| ExperimentError::Runtime(e.to_string()))?;
    write_action_histogram(
        &spec.out_dir.join("action_histogram.csv"),
        &trainer.metrics.rows,
        catalogue.len(),
        spec.histogram_block,
    )?;

    // Appended greedy evaluation with the online-trained model.
    let post_bundle = ModelBundle::load(&checkpoint_out)
        .map_err(|e| ExperimentError::Runtime(e.to_string()))?;
    let variant = if post_bundle.autoencoder.is_some() {
        AgentVariant::DrlBase
    } else {
        AgentVariant::DrlNoAutoencoder
    };
    let post = run_greedy_arm(
        &scenario,
        post_bundle,
        catalogue.clone(),
        variant,
        spec.post_eval_s,
    )?;
    post_arm_csv(&spec.out_dir.join("post_metrics.csv"), &post)?;

    manifest.incomplete = false;
    manifest.insert("updates", trainer.updates);
    manifest.insert("stopped_on_plateau", trainer.stopped);
    manifest.insert("explore_windows", explore_embb_rate.len() as u64);
    manifest.write(&manifest_path)?;

    Ok(TrainOnlineSummary {
        checkpoint_out,
        updates: trainer.updates,
        stopped_on_plateau: trainer.stopped,
        explore_windows: explore_embb_rate.len(),
        explore_embb_rate,
        explore_cell_rate,
        post,
    })
}

fn write_action_histogram(
    path: &std::path::Path,
    rows: &[xapp_suite::MetricsRow],
    n_actions: usize,
    block: usize,
) -> Result<(), ExperimentError> {
    let mut out = std::io::BufWriter::new(
        std::fs::File::create(path).map_err(|e| ExperimentError::Runtime(e.to_string()))?,
    );
    let header: Vec<String> = std::iter::once("block_start_step".to_string())
        .chain((0..n_actions).map(|a| format!("action_{a}")))
        .collect();
    writeln!(out, "{}", header.join(",")).map_err(|e| ExperimentError::Runtime(e.to_string()))?;
    for (b, chunk) in rows.chunks(block.max(1)).enumerate() {
        let mut counts = vec![0u64; n_actions];
        for row in chunk {
            if let Some(a) = row.action_idx {
                counts[a] += 1;
            }
        }
        let line: Vec<String> = std::iter::once((b * block).to_string())
            .chain(counts.iter().map(|c| c.to_string()))
            .collect();
        writeln!(out, "{}", line.join(",")).map_err(|e| ExperimentError::Runtime(e.to_string()))?;
    }
    out.flush().map_err(|e| ExperimentError::Runtime(e.to_string()))
}

fn post_arm_csv(path: &std::path::Path, arm: &ArmResult) -> Result<(), ExperimentError> {
    let mut out = std::io::BufWriter::new(
        std::fs::File::create(path).map_err(|e| ExperimentError::Runtime(e.to_string()))?,
    );
    writeln!(out, "window,reward,cell_rate_bps,embb_rate_bps")
        .map_err(|e| ExperimentError::Runtime(e.to_string()))?;
    for i in 0..arm.windows {
        writeln!(
            out,
            "{},{},{},{}",
            i, arm.rewards[i], arm.cell_rate[i], arm.slice_rate[0][i]
        )
        .map_err(|e| ExperimentError::Runtime(e.to_string()))?;
    }
    out.flush().map_err(|e| ExperimentError::Runtime(e.to_string()))
}
