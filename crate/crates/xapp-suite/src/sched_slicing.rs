//! Joint slicing+scheduling controller: one agent picks a (PRB split,
//! scheduler triple) action per indication, greedily, and emits control
//! only when the selection differs from the profile in force.

use ml_kit::{ActionMode, Autoencoder, PpoAgent};
use sim_core::{KpmRecord, SchedulingProfile, SlicingProfile};

use crate::catalogue::ActionCatalogue;
use crate::metrics::{MetricsLog, MetricsRow};
use crate::observe::{joint_state, ObservationAssembler};
use crate::reward::{aggregate, RewardSpec};
use crate::XappError;

/// Model variants of the joint controller.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgentVariant {
    /// Autoencoder front-end, full catalogue.
    DrlBase,
    /// Autoencoder front-end, catalogue minus the reference slicing.
    DrlReducedActions,
    /// Raw flattened windows fed straight to the agent.
    DrlNoAutoencoder,
}

impl AgentVariant {
    pub fn uses_autoencoder(self) -> bool {
        !matches!(self, AgentVariant::DrlNoAutoencoder)
    }

    pub fn name(self) -> &'static str {
        match self {
            AgentVariant::DrlBase => "drl-base",
            AgentVariant::DrlReducedActions => "drl-reduced-actions",
            AgentVariant::DrlNoAutoencoder => "drl-no-autoencoder",
        }
    }
}

impl std::str::FromStr for AgentVariant {
    type Err = XappError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "drl-base" => Ok(AgentVariant::DrlBase),
            "drl-reduced-actions" => Ok(AgentVariant::DrlReducedActions),
            "drl-no-autoencoder" => Ok(AgentVariant::DrlNoAutoencoder),
            other => Err(XappError::Config(format!("unknown agent variant '{other}'"))),
        }
    }
}

pub struct SchedSlicingXapp {
    pub variant: AgentVariant,
    pub catalogue: ActionCatalogue,
    pub agent: PpoAgent,
    pub autoencoder: Option<Autoencoder>,
    pub reward_spec: RewardSpec,
    pub metrics: MetricsLog,
    assembler: ObservationAssembler,
    current: (SlicingProfile, SchedulingProfile),
    pending: Option<(SlicingProfile, SchedulingProfile)>,
    pub inference_failures: u64,
}

impl SchedSlicingXapp {
    pub fn new(
        variant: AgentVariant,
        catalogue: ActionCatalogue,
        agent: PpoAgent,
        autoencoder: Option<Autoencoder>,
        assembler: ObservationAssembler,
        reward_spec: RewardSpec,
        initial: (SlicingProfile, SchedulingProfile),
    ) -> Result<Self, XappError> {
        if agent.n_actions() != catalogue.len() {
            return Err(XappError::Config(format!(
                "agent has {} actions, catalogue {}",
                agent.n_actions(),
                catalogue.len()
            )));
        }
        if variant.uses_autoencoder() && autoencoder.is_none() {
            return Err(XappError::Config(format!(
                "variant {} needs an autoencoder",
                variant.name()
            )));
        }
        Ok(Self {
            variant,
            catalogue,
            agent,
            autoencoder,
            reward_spec,
            metrics: MetricsLog::default(),
            assembler,
            current: initial,
            pending: None,
            inference_failures: 0,
        })
    }

    pub fn current_profiles(&self) -> (SlicingProfile, SchedulingProfile) {
        self.current
    }

    /// Greedy decision for one indication. `None` means no control: either
    /// the selection equals the profile in force, or inference failed (the
    /// cell keeps its last profile).
    pub fn on_indication(
        &mut self,
        records: &[KpmRecord],
    ) -> Option<(SlicingProfile, SchedulingProfile)> {
        let agg = aggregate(records);
        self.assembler.push(&agg);
        let state = joint_state(&self.assembler, self.autoencoder.as_ref());
        let (action_idx, _) = match self.agent.select_action(&state, ActionMode::Greedy) {
            Ok(a) => a,
            Err(_) => {
                self.inference_failures += 1;
                self.metrics.push(MetricsRow {
                    timestamp_ms: agg.timestamp_ms,
                    action_idx: None,
                    reward: self.reward_spec.compute(&agg),
                    agg,
                });
                return None;
            }
        };
        let target = *self.catalogue.get(action_idx)?;
        self.metrics.push(MetricsRow {
            timestamp_ms: agg.timestamp_ms,
            action_idx: Some(action_idx),
            reward: self.reward_spec.compute(&agg),
            agg,
        });
        let reference = self.pending.unwrap_or(self.current);
        if target == reference {
            return None;
        }
        self.pending = Some(target);
        Some(target)
    }

    /// Control outcome feedback from the RIC.
    pub fn on_control_result(&mut self, applied: bool) {
        if let Some(p) = self.pending.take() {
            if applied {
                self.current = p;
            }
        }
    }
}
