//! Protocol messages: setup, subscription, indication and control, mirroring
//! E2AP procedures at reduced fidelity with two service models.

use serde::{Deserialize, Serialize};
use sim_core::{KpmRecord, SchedulingProfile, SlicingProfile};

/// Service model identifiers. KPM_REPORT covers telemetry reporting,
/// RAN_CONTROL covers slicing/scheduling reconfiguration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SmId {
    #[serde(rename = "KPM_REPORT")]
    KpmReport,
    #[serde(rename = "RAN_CONTROL")]
    RanControl,
}

impl SmId {
    pub const ALL: [SmId; 2] = [SmId::KpmReport, SmId::RanControl];
}

/// Report trigger for a subscription.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TriggerKind {
    Periodic,
    OnEvent,
}

/// Outcome carried by a ControlAck.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ControlStatus {
    Ok,
    Rejected,
}

/// Every message that can cross the wire. Sequence numbers are assigned per
/// session and direction and must be strictly increasing; duplicates are
/// dropped by the receiver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum E2Message {
    SetupRequest {
        bs_id: u32,
        supported_sm_ids: Vec<SmId>,
    },
    SetupResponse {
        accepted: bool,
    },
    SubscriptionRequest {
        sub_id: u64,
        sm_id: SmId,
        report_period_ms: u64,
        trigger: TriggerKind,
    },
    SubscriptionResponse {
        sub_id: u64,
        accepted: bool,
    },
    Indication {
        sub_id: u64,
        bs_id: u32,
        seq_no: u64,
        payload: Vec<KpmRecord>,
    },
    ControlRequest {
        bs_id: u32,
        seq_no: u64,
        slicing: SlicingProfile,
        scheduling: SchedulingProfile,
    },
    ControlAck {
        seq_no: u64,
        status: ControlStatus,
    },
}

impl E2Message {
    pub fn kind(&self) -> &'static str {
        match self {
            E2Message::SetupRequest { .. } => "SetupRequest",
            E2Message::SetupResponse { .. } => "SetupResponse",
            E2Message::SubscriptionRequest { .. } => "SubscriptionRequest",
            E2Message::SubscriptionResponse { .. } => "SubscriptionResponse",
            E2Message::Indication { .. } => "Indication",
            E2Message::ControlRequest { .. } => "ControlRequest",
            E2Message::ControlAck { .. } => "ControlAck",
        }
    }

    pub const KNOWN_KINDS: [&'static str; 7] = [
        "SetupRequest",
        "SetupResponse",
        "SubscriptionRequest",
        "SubscriptionResponse",
        "Indication",
        "ControlRequest",
        "ControlAck",
    ];
}
