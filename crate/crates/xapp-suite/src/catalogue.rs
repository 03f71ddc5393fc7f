//! The discrete action catalogue: slicing triples paired with scheduler
//! triples, densely indexed.

use serde::{Deserialize, Serialize};
use sim_core::{SchedPolicy, SchedulingProfile, SlicingProfile};

use crate::XappError;

/// Slicing triples of the default catalogue for a 50-PRB carrier: the two
/// reference splits plus graded alternatives from eMBB-heavy to balanced.
pub const DEFAULT_SLICINGS: [(u16, u16, u16); 9] = [
    (36, 3, 11),
    (36, 9, 5),
    (42, 4, 4),
    (30, 10, 10),
    (24, 13, 13),
    (18, 16, 16),
    (16, 17, 17),
    (12, 19, 19),
    (6, 22, 22),
];

/// Scheduler triples paired with each slicing option: the three uniform
/// assignments plus one mixed triple.
pub const DEFAULT_SCHEDS: [(SchedPolicy, SchedPolicy, SchedPolicy); 4] = [
    (SchedPolicy::Rr, SchedPolicy::Rr, SchedPolicy::Rr),
    (SchedPolicy::Wf, SchedPolicy::Wf, SchedPolicy::Wf),
    (SchedPolicy::Pf, SchedPolicy::Pf, SchedPolicy::Pf),
    (SchedPolicy::Wf, SchedPolicy::Rr, SchedPolicy::Pf),
];

/// A single catalogue entry as written in config files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ActionSpec {
    pub prbs: [u16; 3],
    pub sched: [SchedPolicy; 3],
}

/// Dense action index <-> (slicing, scheduling) mapping. All entries are
/// valid for the catalogue's carrier width.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionCatalogue {
    actions: Vec<(SlicingProfile, SchedulingProfile)>,
    total_prbs: u16,
}

impl ActionCatalogue {
    /// The default 36-action catalogue (9 slicing triples x 4 scheduler
    /// triples) for a 50-PRB carrier.
    pub fn default_50() -> Self {
        let mut actions = Vec::with_capacity(DEFAULT_SLICINGS.len() * DEFAULT_SCHEDS.len());
        for &(e, m, u) in &DEFAULT_SLICINGS {
            for &(se, sm, su) in &DEFAULT_SCHEDS {
                actions.push((
                    SlicingProfile::new(e, m, u),
                    SchedulingProfile::new(se, sm, su),
                ));
            }
        }
        Self::from_actions(actions, 50).expect("default catalogue is valid")
    }

    pub fn from_actions(
        actions: Vec<(SlicingProfile, SchedulingProfile)>,
        total_prbs: u16,
    ) -> Result<Self, XappError> {
        if actions.is_empty() {
            return Err(XappError::Config("catalogue has no actions".into()));
        }
        for (slicing, _) in &actions {
            slicing
                .validate(total_prbs)
                .map_err(|e| XappError::Config(format!("catalogue entry {slicing}: {e}")))?;
        }
        Ok(Self {
            actions,
            total_prbs,
        })
    }

    pub fn from_specs(specs: &[ActionSpec], total_prbs: u16) -> Result<Self, XappError> {
        Self::from_actions(
            specs
                .iter()
                .map(|s| {
                    (
                        SlicingProfile { prbs: s.prbs },
                        SchedulingProfile { policy: s.sched },
                    )
                })
                .collect(),
            total_prbs,
        )
    }

    /// The catalogue minus every action whose slicing equals `triple`; used
    /// by the reduced-actions agent variant.
    pub fn without_slicing(&self, triple: SlicingProfile) -> Result<Self, XappError> {
        let actions: Vec<_> = self
            .actions
            .iter()
            .filter(|(s, _)| *s != triple)
            .cloned()
            .collect();
        Self::from_actions(actions, self.total_prbs)
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn total_prbs(&self) -> u16 {
        self.total_prbs
    }

    pub fn get(&self, idx: usize) -> Option<&(SlicingProfile, SchedulingProfile)> {
        self.actions.get(idx)
    }

    pub fn index_of(&self, slicing: &SlicingProfile, scheduling: &SchedulingProfile) -> Option<usize> {
        self.actions
            .iter()
            .position(|(s, p)| s == slicing && p == scheduling)
    }

    pub fn contains_slicing(&self, slicing: &SlicingProfile) -> bool {
        self.actions.iter().any(|(s, _)| s == slicing)
    }

    pub fn actions(&self) -> &[(SlicingProfile, SchedulingProfile)] {
        &self.actions
    }

    /// Distinct slicing triples, in first-appearance order.
    pub fn slicing_options(&self) -> Vec<SlicingProfile> {
        let mut out: Vec<SlicingProfile> = Vec::new();
        for (s, _) in &self.actions {
            if !out.contains(s) {
                out.push(*s);
            }
        }
        out
    }
}
