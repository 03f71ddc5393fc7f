//! Slice identifiers and the two control profiles (PRB split, per-slice scheduler).

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::SimError;

/// The three logical network slices served by every cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SliceId {
    Embb,
    Mtc,
    Urllc,
}

impl SliceId {
    pub const ALL: [SliceId; 3] = [SliceId::Embb, SliceId::Mtc, SliceId::Urllc];
    pub const COUNT: usize = 3;

    pub fn index(self) -> usize {
        match self {
            SliceId::Embb => 0,
            SliceId::Mtc => 1,
            SliceId::Urllc => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<SliceId> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            SliceId::Embb => "embb",
            SliceId::Mtc => "mtc",
            SliceId::Urllc => "urllc",
        }
    }
}

impl fmt::Display for SliceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SliceId {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "embb" => Ok(SliceId::Embb),
            "mtc" => Ok(SliceId::Mtc),
            "urllc" => Ok(SliceId::Urllc),
            _ => Err(SimError::Argument(format!("unknown slice '{s}'"))),
        }
    }
}

/// MAC scheduling policy applied inside one slice's PRB mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SchedPolicy {
    /// Round robin: a rotating pointer hands out one PRB at a time.
    Rr,
    /// Waterfilling: backlogged users sorted by channel quality, filled greedily.
    Wf,
    /// Proportional fair: PRB-by-PRB argmax of instantaneous over average rate.
    Pf,
}

impl SchedPolicy {
    pub const ALL: [SchedPolicy; 3] = [SchedPolicy::Rr, SchedPolicy::Wf, SchedPolicy::Pf];

    pub fn name(self) -> &'static str {
        match self {
            SchedPolicy::Rr => "RR",
            SchedPolicy::Wf => "WF",
            SchedPolicy::Pf => "PF",
        }
    }
}

impl fmt::Display for SchedPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchedPolicy {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "RR" => Ok(SchedPolicy::Rr),
            "WF" => Ok(SchedPolicy::Wf),
            "PF" => Ok(SchedPolicy::Pf),
            _ => Err(SimError::Argument(format!("unknown scheduler '{s}'"))),
        }
    }
}

/// Number of PRBs assigned to each slice. The slice masks partition the
/// carrier: allocations of different slices can never overlap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SlicingProfile {
    /// PRB count per slice, indexed by [`SliceId::index`].
    pub prbs: [u16; 3],
}

impl SlicingProfile {
    pub fn new(embb: u16, mtc: u16, urllc: u16) -> Self {
        Self {
            prbs: [embb, mtc, urllc],
        }
    }

    pub fn get(&self, slice: SliceId) -> u16 {
        self.prbs[slice.index()]
    }

    pub fn total(&self) -> u32 {
        self.prbs.iter().map(|&p| u32::from(p)).sum()
    }

    /// Checks the profile against a carrier of `total_prbs` PRBs: every slice
    /// needs at least one PRB and the sum must fit the carrier.
    pub fn validate(&self, total_prbs: u16) -> Result<(), SimError> {
        for (i, &p) in self.prbs.iter().enumerate() {
            if p == 0 {
                return Err(SimError::InvalidProfile(format!(
                    "slice {} has 0 PRBs; every slice needs at least one",
                    SliceId::ALL[i]
                )));
            }
        }
        if self.total() > u32::from(total_prbs) {
            return Err(SimError::InvalidProfile(format!(
                "slicing {} allocates {} PRBs but the carrier has {}",
                self,
                self.total(),
                total_prbs
            )));
        }
        Ok(())
    }
}

impl fmt::Display for SlicingProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.prbs[0], self.prbs[1], self.prbs[2])
    }
}

/// Scheduling policy selected for each slice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SchedulingProfile {
    /// Policy per slice, indexed by [`SliceId::index`].
    pub policy: [SchedPolicy; 3],
}

impl SchedulingProfile {
    pub fn new(embb: SchedPolicy, mtc: SchedPolicy, urllc: SchedPolicy) -> Self {
        Self {
            policy: [embb, mtc, urllc],
        }
    }

    pub fn uniform(p: SchedPolicy) -> Self {
        Self { policy: [p; 3] }
    }

    pub fn get(&self, slice: SliceId) -> SchedPolicy {
        self.policy[slice.index()]
    }

    pub fn with_slice(&self, slice: SliceId, p: SchedPolicy) -> Self {
        let mut out = *self;
        out.policy[slice.index()] = p;
        out
    }
}

impl fmt::Display for SchedulingProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{},{})",
            self.policy[0], self.policy[1], self.policy[2]
        )
    }
}
