//! Offline PPO training on replayed dataset transitions, with optional
//! parallel rollout workers.
//!
//! Each round clones the current policy into every worker; workers collect
//! trajectory segments from forked replay environments and the segments
//! merge in worker order before one PPO update, so results are independent
//! of thread scheduling: the same seed always produces the same loss CSV.

use ml_kit::{
    ActionMode, AeTrainConfig, Autoencoder, ModelBundle, PlateauDetector, PpoAgent, PpoConfig,
    TrajectoryBuffer, Transition,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sim_core::{ScenarioConfig, SliceId};

use data_factory::Dataset;

use crate::catalogue::ActionCatalogue;
use crate::observe::{joint_state, joint_state_dim, NormRefs, ObsMetrics, ObservationAssembler};
use crate::online::UpdateRow;
use crate::replay::{ReplayConfig, ReplayEnv};
use crate::reward::RewardSpec;
use crate::sched_slicing::AgentVariant;
use crate::XappError;

#[derive(Debug, Clone)]
pub struct OfflineTrainConfig {
    pub variant: AgentVariant,
    pub ppo: PpoConfig,
    pub ae: AeTrainConfig,
    pub replay: ReplayConfig,
    /// Transitions gathered per update, split across workers.
    pub rollout_len: usize,
    pub max_updates: u64,
    pub plateau_window: usize,
    pub plateau_slope: f64,
    pub min_updates: u64,
    pub workers: usize,
    pub seed: u64,
    /// Cap on autoencoder training samples drawn from the dataset.
    pub ae_sample_cap: usize,
}

impl Default for OfflineTrainConfig {
    fn default() -> Self {
        Self {
            variant: AgentVariant::DrlBase,
            // Window rewards are immediate consequences of the applied
            // profile, so credit assignment uses near-one-step advantages;
            // long-lambda GAE buries the per-action signal in future-return
            // noise on this task.
            ppo: PpoConfig {
                gamma: 0.4,
                gae_lambda: 0.1,
                ..Default::default()
            },
            ae: AeTrainConfig::default(),
            replay: ReplayConfig::default(),
            rollout_len: 128,
            max_updates: 600,
            plateau_window: 30,
            plateau_slope: 1e-6,
            min_updates: 250,
            workers: 1,
            seed: 1,
            ae_sample_cap: 4000,
        }
    }
}

pub struct TrainedModel {
    pub bundle: ModelBundle,
    pub loss_rows: Vec<UpdateRow>,
    pub ae_epoch_losses: Vec<f64>,
    pub stopped_on_plateau: bool,
}

/// Extracts autoencoder training samples: every slice's observation window
/// as each (base station, action) telemetry stream plays back in time
/// order.
pub fn autoencoder_samples(
    ds: &Dataset,
    scenario: &ScenarioConfig,
    catalogue: &ActionCatalogue,
    cap: usize,
    seed: u64,
) -> Vec<ndarray::Array1<f64>> {
    let refs = NormRefs::from_scenario(scenario);
    let grouped = crate::replay::dataset_windows(ds, catalogue);
    let mut keys: Vec<(u32, usize)> = grouped.keys().copied().collect();
    keys.sort_unstable();
    let mut samples = Vec::new();
    for key in keys {
        let mut asm = ObservationAssembler::new(ObsMetrics::RateBufferTbs, refs);
        for agg in &grouped[&key] {
            asm.push(agg);
            for slice in SliceId::ALL {
                samples.push(asm.observation(slice).flatten());
            }
        }
    }
    if samples.len() > cap {
        // Deterministic thinning.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..samples.len()).rev() {
            let j = rng.random_range(0..=i);
            samples.swap(i, j);
        }
        samples.truncate(cap);
    }
    samples
}

/// Trains the autoencoder (when the variant uses one) and then the PPO
/// agent on replayed transitions. Stops on an entropy-loss plateau or the
/// update cap.
pub fn train_offline(
    ds: &Dataset,
    scenario: &ScenarioConfig,
    catalogue: &ActionCatalogue,
    cfg: &OfflineTrainConfig,
) -> Result<TrainedModel, XappError> {
    let refs = NormRefs::from_scenario(scenario);
    let reward_spec = RewardSpec::from_scenario(scenario);

    let (autoencoder, ae_epoch_losses) = if cfg.variant.uses_autoencoder() {
        let mut ae = Autoencoder::with_lr(cfg.seed ^ 0xAE, cfg.ae.lr);
        let samples = autoencoder_samples(ds, scenario, catalogue, cfg.ae_sample_cap, cfg.seed ^ 0x5A);
        let losses = ae.train(&samples, &cfg.ae).map_err(XappError::Ml)?;
        (Some(ae), losses)
    } else {
        (None, Vec::new())
    };

    let base_env = ReplayEnv::from_dataset(ds, catalogue, cfg.replay, cfg.seed)?;
    let obs_dim = joint_state_dim(cfg.variant.uses_autoencoder());
    let mut agent = PpoAgent::new(obs_dim, catalogue.len(), cfg.ppo, cfg.seed ^ 0xA6E_17);

    let workers = cfg.workers.max(1);
    let segment_len = cfg.rollout_len.div_ceil(workers);
    let mut plateau = PlateauDetector::new(cfg.plateau_window, cfg.plateau_slope);
    let mut loss_rows = Vec::new();
    let mut stopped_on_plateau = false;

    for round in 0..cfg.max_updates {
        let version = agent.policy_version;
        let segments: Vec<TrajectoryBuffer> = std::thread::scope(|scope| {
            let mut handles = Vec::with_capacity(workers);
            for w in 0..workers {
                let mut worker_agent = agent.clone();
                worker_agent.rng =
                    ChaCha8Rng::seed_from_u64(worker_seed(cfg.seed, round, w as u64));
                let mut env = base_env.fork(worker_seed(cfg.seed, round, w as u64) ^ 0xE0F);
                let ae = autoencoder.as_ref();
                handles.push(scope.spawn(move || {
                    collect_segment(&mut worker_agent, &mut env, ae, refs, reward_spec, segment_len, version)
                }));
            }
            handles.into_iter().map(|h| h.join().expect("worker")).collect()
        });
        let mut buffer = TrajectoryBuffer::merge(segments).map_err(XappError::Ml)?;
        let mean_reward = buffer.mean_reward();
        let losses = agent.update(&mut buffer, 0.0).map_err(XappError::Ml)?;
        loss_rows.push(UpdateRow {
            global_step: agent.global_step,
            policy_loss: losses.policy,
            value_loss: losses.value,
            entropy_loss: losses.entropy,
            mean_reward,
        });
        let plateaued = plateau.push(losses.entropy.abs());
        if plateaued && round + 1 >= cfg.min_updates {
            stopped_on_plateau = true;
            break;
        }
    }

    Ok(TrainedModel {
        bundle: ModelBundle { agent, autoencoder },
        loss_rows,
        ae_epoch_losses,
        stopped_on_plateau,
    })
}

fn worker_seed(seed: u64, round: u64, worker: u64) -> u64 {
    seed ^ round.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ worker.wrapping_mul(0xD1B5_4A32_D192_ED03)
}

/// One worker's contribution to a round: whole episodes until the segment
/// is full. Segments always end on an episode boundary (done = true), so
/// concatenating worker segments never lets advantage estimation bleed
/// across trajectories.
fn collect_segment(
    agent: &mut PpoAgent,
    env: &mut ReplayEnv,
    autoencoder: Option<&Autoencoder>,
    refs: NormRefs,
    reward_spec: RewardSpec,
    segment_len: usize,
    version: u64,
) -> TrajectoryBuffer {
    let mut buffer = TrajectoryBuffer::new(version);
    let mut assembler = ObservationAssembler::new(ObsMetrics::RateBufferTbs, refs);
    env.reset();
    assembler.clear();
    loop {
        let state = joint_state(&assembler, autoencoder);
        let (action, log_prob) = agent
            .select_action(&state, ActionMode::Explore)
            .expect("state dims fixed");
        let value = agent.value(&state).expect("state dims fixed");
        let (window, done) = env.step(action);
        let reward = reward_spec.compute(&window);
        assembler.push(&window);
        buffer.push(Transition {
            state,
            action,
            log_prob,
            reward,
            value,
            done,
        });
        if done {
            env.reset();
            assembler.clear();
            if buffer.len() >= segment_len {
                break;
            }
        }
    }
    buffer
}
