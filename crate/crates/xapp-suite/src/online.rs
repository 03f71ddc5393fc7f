//! Online-training xApp: explores actions on a live cell, learns from the
//! resulting windows, checkpoints periodically and stops on an entropy-loss
//! plateau.

use std::path::PathBuf;

use ml_kit::{
    ActionMode, Autoencoder, ModelBundle, PlateauDetector, PpoAgent, PpoLosses, TrajectoryBuffer,
    Transition,
};
use ndarray::Array1;
use sim_core::{KpmRecord, SchedulingProfile, SlicingProfile};

use crate::catalogue::ActionCatalogue;
use crate::metrics::{MetricsLog, MetricsRow};
use crate::observe::{joint_state, ObservationAssembler};
use crate::reward::{aggregate, RewardSpec};
use crate::XappError;

#[derive(Debug, Clone)]
pub struct OnlineConfig {
    /// Transitions per PPO update.
    pub rollout_len: usize,
    /// Checkpoint written every this many updates (0 disables).
    pub checkpoint_every_updates: u64,
    pub checkpoint_path: Option<PathBuf>,
    /// Entropy-loss plateau detector: window length in updates and the
    /// absolute slope threshold that counts as flat.
    pub plateau_window: usize,
    pub plateau_slope: f64,
    /// Updates to run before the plateau rule may stop training.
    pub min_updates: u64,
}

impl Default for OnlineConfig {
    fn default() -> Self {
        Self {
            rollout_len: 128,
            checkpoint_every_updates: 8,
            checkpoint_path: None,
            plateau_window: 12,
            plateau_slope: 1e-4,
            min_updates: 16,
        }
    }
}

/// What one indication produced.
#[derive(Debug, Default)]
pub struct OnlineStep {
    pub control: Option<(SlicingProfile, SchedulingProfile)>,
    pub losses: Option<PpoLosses>,
    pub checkpointed: bool,
    pub stopped: bool,
}

struct PendingStep {
    state: Array1<f64>,
    action: usize,
    log_prob: f64,
    value: f64,
    /// Full distribution at selection time, for rewriting the transition
    /// if the control is rejected and a different profile stays in force.
    probs: Array1<f64>,
}

/// Per-update row of the training metrics stream.
#[derive(Debug, Clone, Copy)]
pub struct UpdateRow {
    pub global_step: u64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy_loss: f64,
    pub mean_reward: f64,
}

pub struct OnlineTrainerXapp {
    pub agent: PpoAgent,
    pub autoencoder: Option<Autoencoder>,
    pub catalogue: ActionCatalogue,
    pub reward_spec: RewardSpec,
    pub cfg: OnlineConfig,
    pub metrics: MetricsLog,
    pub update_rows: Vec<UpdateRow>,
    assembler: ObservationAssembler,
    buffer: TrajectoryBuffer,
    pending: Option<PendingStep>,
    current: (SlicingProfile, SchedulingProfile),
    plateau: PlateauDetector,
    pub updates: u64,
    pub stopped: bool,
}

impl OnlineTrainerXapp {
    pub fn new(
        agent: PpoAgent,
        autoencoder: Option<Autoencoder>,
        catalogue: ActionCatalogue,
        assembler: ObservationAssembler,
        reward_spec: RewardSpec,
        cfg: OnlineConfig,
        initial: (SlicingProfile, SchedulingProfile),
    ) -> Result<Self, XappError> {
        if agent.n_actions() != catalogue.len() {
            return Err(XappError::Config(format!(
                "agent has {} actions, catalogue {}",
                agent.n_actions(),
                catalogue.len()
            )));
        }
        let buffer = agent.new_buffer();
        let plateau = PlateauDetector::new(cfg.plateau_window, cfg.plateau_slope);
        Ok(Self {
            agent,
            autoencoder,
            catalogue,
            reward_spec,
            cfg,
            metrics: MetricsLog::default(),
            update_rows: Vec::new(),
            assembler,
            buffer,
            pending: None,
            current: initial,
            plateau,
            updates: 0,
            stopped: false,
        })
    }

    pub fn buffer_len(&self) -> usize {
        self.buffer.len()
    }

    pub fn current_profiles(&self) -> (SlicingProfile, SchedulingProfile) {
        self.current
    }

    /// One training step: score the previous action with this window's
    /// reward, update on a full rollout, then explore the next action.
    pub fn on_indication(&mut self, records: &[KpmRecord]) -> Result<OnlineStep, XappError> {
        if self.stopped {
            return Ok(OnlineStep::default());
        }
        let agg = aggregate(records);
        self.assembler.push(&agg);
        let reward = self.reward_spec.compute(&agg);
        let mut out = OnlineStep::default();

        if let Some(p) = self.pending.take() {
            self.buffer.push(Transition {
                state: p.state,
                action: p.action,
                log_prob: p.log_prob,
                reward,
                value: p.value,
                done: false,
            });
        }

        let state = joint_state(&self.assembler, self.autoencoder.as_ref());

        if self.buffer.len() >= self.cfg.rollout_len {
            let bootstrap = self.agent.value(&state).map_err(XappError::Ml)?;
            let mean_reward = self.buffer.mean_reward();
            let losses = self
                .agent
                .update(&mut self.buffer, bootstrap)
                .map_err(XappError::Ml)?;
            debug_assert_eq!(self.buffer.len(), 0, "on-policy buffer drained");
            self.buffer = self.agent.new_buffer();
            self.updates += 1;
            self.update_rows.push(UpdateRow {
                global_step: self.agent.global_step,
                policy_loss: losses.policy,
                value_loss: losses.value,
                entropy_loss: losses.entropy,
                mean_reward,
            });
            let plateaued = self.plateau.push(losses.entropy.abs());
            if plateaued && self.updates >= self.cfg.min_updates {
                self.stopped = true;
                out.stopped = true;
            }
            if self.cfg.checkpoint_every_updates > 0
                && self.updates % self.cfg.checkpoint_every_updates == 0
            {
                if let Some(path) = &self.cfg.checkpoint_path {
                    self.save_bundle(path)?;
                    out.checkpointed = true;
                }
            }
            out.losses = Some(losses);
        }

        let probs = self.agent.policy(&state).map_err(XappError::Ml)?;
        let (action, log_prob) = self
            .agent
            .select_action(&state, ActionMode::Explore)
            .map_err(XappError::Ml)?;
        let value = self.agent.value(&state).map_err(XappError::Ml)?;
        let target = *self
            .catalogue
            .get(action)
            .ok_or_else(|| XappError::Config("action outside catalogue".into()))?;
        self.metrics.push(MetricsRow {
            timestamp_ms: agg.timestamp_ms,
            action_idx: Some(action),
            reward,
            agg,
        });
        self.pending = Some(PendingStep {
            state,
            action,
            log_prob,
            value,
            probs,
        });
        if target != self.current {
            out.control = Some(target);
            // The ack (or rejection) arrives via on_control_result before
            // the next indication.
            self.current = target;
        }
        Ok(out)
    }

    /// Feedback for the last emitted control. On rejection the pending
    /// transition is rewritten to the profile actually in force.
    pub fn on_control_result(&mut self, applied: bool, previous: (SlicingProfile, SchedulingProfile)) {
        if applied {
            return;
        }
        self.current = previous;
        if let Some(p) = &mut self.pending {
            if let Some(applied_idx) = self.catalogue.index_of(&previous.0, &previous.1) {
                p.action = applied_idx;
                p.log_prob = p.probs[applied_idx].max(1e-300).ln();
            }
        }
    }

    pub fn save_bundle(&self, path: &std::path::Path) -> Result<(), XappError> {
        let bundle = ModelBundle {
            agent: self.agent.clone(),
            autoencoder: self.autoencoder.clone(),
        };
        bundle.save(path).map_err(XappError::Ml)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observe::{joint_state_dim, NormRefs, ObsMetrics};
    use ml_kit::PpoConfig;
    use sim_core::{ScenarioConfig, SchedPolicy, SliceId};

    fn records(seed: u64) -> Vec<KpmRecord> {
        (0..6)
            .map(|i| KpmRecord {
                timestamp_ms: 250 * (seed + 1),
                bs_id: 0,
                ue_id: i,
                slice: SliceId::ALL[(i % 3) as usize],
                dl_mcs: 14.0,
                dl_tx_symbols: 1200,
                dl_buffer_bytes: 100 * seed,
                dl_rate_bps: 1e6 + seed as f64,
                dl_phy_tbs: 10 + seed,
                dl_cqi: 8.0,
                ul_buffer_bytes: 0,
                ul_rate_bps: 0.0,
                ul_errors: 0,
                granted_prbs: 100,
                requested_prbs: 120,
            })
            .collect()
    }

    fn make(rollout: usize) -> OnlineTrainerXapp {
        let cfg = ScenarioConfig::default();
        let catalogue = ActionCatalogue::default_50();
        let agent = PpoAgent::new(
            joint_state_dim(true),
            catalogue.len(),
            PpoConfig {
                minibatch: 16,
                ..Default::default()
            },
            7,
        );
        OnlineTrainerXapp::new(
            agent,
            Some(Autoencoder::new(8)),
            catalogue,
            ObservationAssembler::new(ObsMetrics::RateBufferTbs, NormRefs::from_scenario(&cfg)),
            RewardSpec::from_scenario(&cfg),
            OnlineConfig {
                rollout_len: rollout,
                checkpoint_every_updates: 0,
                min_updates: u64::MAX,
                ..Default::default()
            },
            (
                cfg.default_slicing,
                SchedulingProfile::uniform(SchedPolicy::Rr),
            ),
        )
        .unwrap()
    }

    #[test]
    fn buffer_empties_exactly_on_rollout_boundaries() {
        let mut xapp = make(16);
        let mut emptied_at = Vec::new();
        for step in 0..50u64 {
            let out = xapp.on_indication(&records(step)).unwrap();
            if out.losses.is_some() {
                assert_eq!(xapp.buffer_len(), 0);
                emptied_at.push(step);
            }
        }
        // Transition k is appended at indication k+1; the 16th lands at
        // indication 16, where the update fires.
        assert_eq!(emptied_at, vec![16, 32, 48]);
    }

    #[test]
    fn global_step_continues_across_bundle_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("online.ckpt");
        let mut xapp = make(8);
        for step in 0..20u64 {
            xapp.on_indication(&records(step)).unwrap();
        }
        let step_before = xapp.agent.global_step;
        assert!(step_before > 0);
        xapp.save_bundle(&path).unwrap();
        let bundle = ModelBundle::load(&path).unwrap();
        assert_eq!(bundle.agent.global_step, step_before);
    }

    #[test]
    fn rejection_rewrites_pending_transition() {
        let mut xapp = make(8);
        let initial = xapp.current_profiles();
        // Step until a control is actually emitted.
        let mut emitted = None;
        for step in 0..40u64 {
            let out = xapp.on_indication(&records(step)).unwrap();
            if out.control.is_some() {
                emitted = out.control;
                break;
            }
        }
        let emitted = emitted.expect("explore mode emits controls");
        assert_ne!(emitted, initial);
        xapp.on_control_result(false, initial);
        assert_eq!(xapp.current_profiles(), initial);
        let applied_idx = xapp.catalogue.index_of(&initial.0, &initial.1).unwrap();
        assert_eq!(xapp.pending.as_ref().unwrap().action, applied_idx);
    }
}
