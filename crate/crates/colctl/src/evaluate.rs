//! Evaluation workflow: the adaptive agent against every static
//! (slicing x scheduler) baseline on identical seeds, emitting per-slice
//! metric CDFs and a composite-reward comparison table.

use std::io::Write;
use std::path::PathBuf;

use ml_kit::ModelBundle;
use ric_nrt::{ControlOutcome, RicConfig, XappEvent};
use sim_core::{ScenarioConfig, SchedPolicy, SchedulingProfile, SliceId, SlicingProfile};
use xapp_suite::{
    aggregate, ActionCatalogue, AgentVariant, NormRefs, ObsMetrics, ObservationAssembler,
    RewardSpec, SchedSlicingXapp, WindowAggregate,
};

use crate::manifest::RunManifest;
use crate::runner::{build_loop, cdf_points, mean};
use crate::ExperimentError;

/// CSV-safe arm label: "static_36-3-11_RR-RR-RR".
pub fn arm_label(kind: &str, slicing: &SlicingProfile, scheduling: &SchedulingProfile) -> String {
    format!(
        "{kind}_{}-{}-{}_{}-{}-{}",
        slicing.prbs[0],
        slicing.prbs[1],
        slicing.prbs[2],
        scheduling.policy[0],
        scheduling.policy[1],
        scheduling.policy[2]
    )
}

pub struct EvaluateSpec {
    pub scenario: ScenarioConfig,
    pub checkpoint: PathBuf,
    pub variant: AgentVariant,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub duration_s: u64,
}

/// Windowed series collected while one arm ran.
#[derive(Debug, Clone, Default)]
pub struct ArmResult {
    pub name: String,
    pub windows: usize,
    pub mean_reward: f64,
    pub rewards: Vec<f64>,
    /// Cell aggregate downlink rate per window.
    pub cell_rate: Vec<f64>,
    pub slice_rate: [Vec<f64>; 3],
    pub slice_buffer: [Vec<f64>; 3],
    pub slice_tbs: [Vec<f64>; 3],
    pub slice_ratio: [Vec<f64>; 3],
}

impl ArmResult {
    fn push_window(&mut self, agg: &WindowAggregate, reward: f64) {
        self.windows += 1;
        self.rewards.push(reward);
        let mut cell = 0.0;
        for slice in SliceId::ALL {
            let s = agg.slice(slice);
            cell += s.dl_rate_bps;
            self.slice_rate[slice.index()].push(s.dl_rate_bps);
            self.slice_buffer[slice.index()].push(s.dl_buffer_bytes);
            self.slice_tbs[slice.index()].push(s.dl_phy_tbs);
            self.slice_ratio[slice.index()].push(s.prb_ratio());
        }
        self.cell_rate.push(cell);
    }

    fn finish(&mut self) {
        self.mean_reward = mean(&self.rewards);
    }
}

pub struct EvaluateSummary {
    pub arms: Vec<ArmResult>,
    pub adaptive_index: usize,
    pub comparison_csv: PathBuf,
}

/// Runs one static-profile arm.
pub fn run_static_arm(
    scenario: &ScenarioConfig,
    slicing: SlicingProfile,
    scheduling: SchedulingProfile,
    duration_s: u64,
) -> Result<ArmResult, ExperimentError> {
    let reward_spec = RewardSpec::from_scenario(scenario);
    let mut loop_ = build_loop(scenario, RicConfig::default())?;
    let xapp = loop_.ric.attach_xapp("static-arm");
    loop_
        .subscribe_all(xapp, scenario.reporting_period_ms)
        .map_err(|e| ExperimentError::Runtime(e.to_string()))?;
    for bs in loop_.ric.registry().bs_ids() {
        loop_
            .send_control(xapp, bs, slicing, scheduling)
            .map_err(|e| ExperimentError::Runtime(e.to_string()))?;
    }
    let mut arm = ArmResult {
        name: arm_label("static", &slicing, &scheduling),
        ..Default::default()
    };
    let end = loop_.now_ms() + duration_s * 1000;
    while loop_.now_ms() < end {
        loop_.step_ms();
        while let Some(ev) = loop_.poll_xapp(xapp) {
            if let XappEvent::Indication { records, .. } = ev {
                let agg = aggregate(&records);
                arm.push_window(&agg, reward_spec.compute(&agg));
            }
        }
    }
    arm.finish();
    Ok(arm)
}

/// Runs the greedy adaptive arm from a model bundle.
pub fn run_greedy_arm(
    scenario: &ScenarioConfig,
    bundle: ModelBundle,
    catalogue: ActionCatalogue,
    variant: AgentVariant,
    duration_s: u64,
) -> Result<ArmResult, ExperimentError> {
    let reward_spec = RewardSpec::from_scenario(scenario);
    let assembler =
        ObservationAssembler::new(ObsMetrics::RateBufferTbs, NormRefs::from_scenario(scenario));
    let mut xapp_logic = SchedSlicingXapp::new(
        variant,
        catalogue,
        bundle.agent,
        bundle.autoencoder,
        assembler,
        reward_spec,
        (scenario.default_slicing, scenario.default_scheduling),
    )
    .map_err(|e| ExperimentError::Config(e.to_string()))?;

    let mut loop_ = build_loop(scenario, RicConfig::default())?;
    let xapp = loop_.ric.attach_xapp("adaptive");
    loop_
        .subscribe_all(xapp, scenario.reporting_period_ms)
        .map_err(|e| ExperimentError::Runtime(e.to_string()))?;

    let mut arm = ArmResult {
        name: format!("adaptive_{}", variant.name()),
        ..Default::default()
    };
    let end = loop_.now_ms() + duration_s * 1000;
    while loop_.now_ms() < end {
        loop_.step_ms();
        while let Some(ev) = loop_.poll_xapp(xapp) {
            match ev {
                XappEvent::Indication { bs_id, records, .. } => {
                    let agg = aggregate(&records);
                    arm.push_window(&agg, xapp_logic.reward_spec.compute(&agg));
                    if let Some((slicing, scheduling)) = xapp_logic.on_indication(&records) {
                        loop_
                            .send_control(xapp, bs_id, slicing, scheduling)
                            .map_err(|e| ExperimentError::Runtime(e.to_string()))?;
                    }
                }
                XappEvent::ControlResult { outcome, .. } => {
                    xapp_logic.on_control_result(matches!(
                        outcome,
                        ControlOutcome::Acked(e2_lite::ControlStatus::Ok)
                    ));
                }
                _ => {}
            }
        }
    }
    arm.finish();
    Ok(arm)
}

/// Full evaluation: adaptive agent plus every (slicing x uniform-scheduler)
/// static baseline, all on the same seed.
pub fn run_evaluate(spec: &EvaluateSpec) -> Result<EvaluateSummary, ExperimentError> {
    if spec.duration_s == 0 {
        return Err(ExperimentError::Config("duration must be positive".into()));
    }
    std::fs::create_dir_all(&spec.out_dir)
        .map_err(|e| ExperimentError::Runtime(e.to_string()))?;
    let bundle =
        ModelBundle::load(&spec.checkpoint).map_err(|e| ExperimentError::Config(e.to_string()))?;
    let catalogue =
        crate::train_offline::catalogue_for_checkpoint(&spec.checkpoint, bundle.agent.n_actions())?;

    let mut scenario = spec.scenario.clone();
    scenario.rng_seed = spec.seed;

    let manifest_path = spec.out_dir.join("manifest.json");
    let mut manifest = RunManifest::new(
        "evaluate",
        &scenario,
        spec.seed,
        &format!(
            "checkpoint={} duration={}",
            spec.checkpoint.display(),
            spec.duration_s
        ),
    );
    manifest.write(&manifest_path)?;

    let mut arms = Vec::new();
    arms.push(run_greedy_arm(
        &scenario,
        bundle,
        catalogue.clone(),
        spec.variant,
        spec.duration_s,
    )?);
    for slicing in catalogue.slicing_options() {
        for policy in SchedPolicy::ALL {
            arms.push(run_static_arm(
                &scenario,
                slicing,
                SchedulingProfile::uniform(policy),
                spec.duration_s,
            )?);
        }
    }
    for arm in &mut arms {
        arm.finish();
    }

    let comparison_csv = spec.out_dir.join("comparison.csv");
    write_comparison(&comparison_csv, &arms)?;
    write_cdfs(&spec.out_dir, &arms)?;

    manifest.incomplete = false;
    manifest.insert("arms", arms.len() as u64);
    manifest.write(&manifest_path)?;

    Ok(EvaluateSummary {
        arms,
        adaptive_index: 0,
        comparison_csv,
    })
}

fn write_comparison(path: &std::path::Path, arms: &[ArmResult]) -> Result<(), ExperimentError> {
    let mut out = std::io::BufWriter::new(
        std::fs::File::create(path).map_err(|e| ExperimentError::Runtime(e.to_string()))?,
    );
    writeln!(
        out,
        "arm,windows,mean_reward,mean_cell_rate_bps,embb_rate_bps,mtc_phy_tbs,urllc_buffer_bytes,urllc_prb_ratio"
    )
    .map_err(|e| ExperimentError::Runtime(e.to_string()))?;
    for arm in arms {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            arm.name,
            arm.windows,
            arm.mean_reward,
            mean(&arm.cell_rate),
            mean(&arm.slice_rate[0]),
            mean(&arm.slice_tbs[1]),
            mean(&arm.slice_buffer[2]),
            mean(&arm.slice_ratio[2]),
        )
        .map_err(|e| ExperimentError::Runtime(e.to_string()))?;
    }
    out.flush().map_err(|e| ExperimentError::Runtime(e.to_string()))
}

fn write_cdfs(out_dir: &std::path::Path, arms: &[ArmResult]) -> Result<(), ExperimentError> {
    let metrics: [(&str, fn(&ArmResult, usize) -> &Vec<f64>); 4] = [
        ("rate_bps", |a, i| &a.slice_rate[i]),
        ("buffer_bytes", |a, i| &a.slice_buffer[i]),
        ("phy_tbs", |a, i| &a.slice_tbs[i]),
        ("prb_ratio", |a, i| &a.slice_ratio[i]),
    ];
    for (metric, series) in metrics {
        for slice in SliceId::ALL {
            let path = out_dir.join(format!("cdf_{slice}_{metric}.csv"));
            let mut out = std::io::BufWriter::new(
                std::fs::File::create(path).map_err(|e| ExperimentError::Runtime(e.to_string()))?,
            );
            writeln!(out, "arm,value,cum").map_err(|e| ExperimentError::Runtime(e.to_string()))?;
            for arm in arms {
                for (v, c) in cdf_points(series(arm, slice.index())) {
                    writeln!(out, "{},{},{}", arm.name, v, c)
                        .map_err(|e| ExperimentError::Runtime(e.to_string()))?;
                }
            }
        }
    }
    // Cell-aggregate throughput CDF.
    let path = out_dir.join("cdf_cell_rate.csv");
    let mut out = std::io::BufWriter::new(
        std::fs::File::create(path).map_err(|e| ExperimentError::Runtime(e.to_string()))?,
    );
    writeln!(out, "arm,value,cum").map_err(|e| ExperimentError::Runtime(e.to_string()))?;
    for arm in arms {
        for (v, c) in cdf_points(&arm.cell_rate) {
            writeln!(out, "{},{},{}", arm.name, v, c)
                .map_err(|e| ExperimentError::Runtime(e.to_string()))?;
        }
    }
    out.flush().map_err(|e| ExperimentError::Runtime(e.to_string()))
}
