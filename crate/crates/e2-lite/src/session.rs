//! Session state machine for one node<->RIC connection.
//!
//! Both endpoints run the same machine with a role flag. The lifecycle is
//! Idle -> SetupSent -> Established -> Subscribed: Indications are legal
//! only in Subscribed, ControlRequests in Established or later, and any
//! out-of-order message resets the session to Idle. Sequence numbers are
//! assigned per direction and strictly increase; duplicate Indications and
//! ControlRequests are dropped and counted rather than treated as errors.

use std::collections::BTreeMap;

use sim_core::{KpmRecord, SchedulingProfile, SlicingProfile};

use crate::codec::{encode, FrameDecoder};
use crate::msg::{ControlStatus, E2Message, SmId, TriggerKind};
use crate::E2Error;

/// Which endpoint of the connection this session is.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    /// Base-station side: initiates setup, serves subscriptions, applies
    /// control.
    Node,
    /// RIC side: accepts setups, subscribes, sends control.
    Ric,
}

/// Connection lifecycle phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Idle,
    SetupSent,
    Established,
    Subscribed,
}

/// Input to [`Session::step`].
#[derive(Debug)]
pub enum Event<'a> {
    /// Bytes arrived from the peer.
    BytesIn(&'a [u8]),
    /// Simulated-clock tick.
    Timer,
    /// Local command from the session owner.
    Command(Command),
}

/// Local commands a session owner can issue.
#[derive(Debug, Clone)]
pub enum Command {
    /// Node: begin the setup handshake.
    StartSetup { bs_id: u32, sms: Vec<SmId> },
    /// Node: send one report for an active subscription.
    SendIndication {
        sub_id: u64,
        records: Vec<KpmRecord>,
    },
    /// Node: answer a delivered ControlRequest.
    AckControl { seq_no: u64, status: ControlStatus },
    /// Ric: request a subscription on the peer node.
    Subscribe {
        sub_id: u64,
        sm_id: SmId,
        report_period_ms: u64,
        trigger: TriggerKind,
    },
    /// Ric: send a control request; the session assigns the sequence number.
    SendControl {
        bs_id: u32,
        slicing: SlicingProfile,
        scheduling: SchedulingProfile,
    },
}

/// Output of [`Session::step`].
#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    /// Bytes to write to the peer.
    Send(Vec<u8>),
    /// A message for the session owner (RIC core or node agent).
    Deliver(E2Message),
    /// A periodic subscription's report is due.
    ReportDue { sub_id: u64 },
    /// The session hit a protocol violation and went back to Idle.
    Reset { reason: String },
}

#[derive(Debug, Clone)]
struct SubState {
    period_ms: u64,
    trigger: TriggerKind,
    next_due_ms: u64,
    active: bool,
}

/// One endpoint of a node<->RIC connection.
#[derive(Debug)]
pub struct Session {
    role: Role,
    phase: Phase,
    now_ms: u64,
    bs_id: Option<u32>,
    supported_sms: Vec<SmId>,
    subs: BTreeMap<u64, SubState>,
    decoder: FrameDecoder,
    tx_seq: u64,
    last_rx_seq: Option<u64>,
    /// Duplicate messages received and dropped.
    pub dup_drops: u64,
}

impl Session {
    pub fn new(role: Role) -> Self {
        Self {
            role,
            phase: Phase::Idle,
            now_ms: 0,
            bs_id: None,
            supported_sms: SmId::ALL.to_vec(),
            subs: BTreeMap::new(),
            decoder: FrameDecoder::new(),
            tx_seq: 0,
            last_rx_seq: None,
            dup_drops: 0,
        }
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn bs_id(&self) -> Option<u32> {
        self.bs_id
    }

    pub fn last_tx_seq(&self) -> u64 {
        self.tx_seq
    }

    /// Advances the session clock and applies one event.
    pub fn step(&mut self, now_ms: u64, event: Event<'_>) -> Result<Vec<Action>, E2Error> {
        self.now_ms = self.now_ms.max(now_ms);
        match event {
            Event::BytesIn(bytes) => Ok(self.on_bytes(bytes)),
            Event::Timer => Ok(self.on_timer()),
            Event::Command(cmd) => self.on_command(cmd),
        }
    }

    fn on_bytes(&mut self, bytes: &[u8]) -> Vec<Action> {
        self.decoder.push(bytes);
        let mut actions = Vec::new();
        loop {
            match self.decoder.next() {
                Ok(Some(msg)) => {
                    let reset = self.handle_message(msg, &mut actions);
                    if reset {
                        break;
                    }
                }
                Ok(None) => break,
                Err(e) => {
                    actions.push(self.reset(format!("decode failed: {e}")));
                    break;
                }
            }
        }
        actions
    }

    fn on_timer(&mut self) -> Vec<Action> {
        let mut actions = Vec::new();
        if self.phase != Phase::Subscribed {
            return actions;
        }
        for (&sub_id, sub) in self.subs.iter_mut() {
            if !sub.active || sub.trigger != TriggerKind::Periodic {
                continue;
            }
            while sub.next_due_ms <= self.now_ms {
                actions.push(Action::ReportDue { sub_id });
                sub.next_due_ms += sub.period_ms;
            }
        }
        actions
    }

    fn on_command(&mut self, cmd: Command) -> Result<Vec<Action>, E2Error> {
        let mut actions = Vec::new();
        match (self.role, cmd) {
            (Role::Node, Command::StartSetup { bs_id, sms }) => {
                if self.phase != Phase::Idle {
                    return Err(E2Error::BadCommand("setup already started".into()));
                }
                self.bs_id = Some(bs_id);
                self.phase = Phase::SetupSent;
                actions.push(self.send(&E2Message::SetupRequest {
                    bs_id,
                    supported_sm_ids: sms,
                })?);
            }
            (Role::Node, Command::SendIndication { sub_id, records }) => {
                if self.phase != Phase::Subscribed {
                    return Err(E2Error::BadCommand(
                        "indications are only legal in Subscribed".into(),
                    ));
                }
                if !self.subs.get(&sub_id).is_some_and(|s| s.active) {
                    return Err(E2Error::BadCommand(format!("no active sub {sub_id}")));
                }
                self.tx_seq += 1;
                let msg = E2Message::Indication {
                    sub_id,
                    bs_id: self.bs_id.unwrap_or(0),
                    seq_no: self.tx_seq,
                    payload: records,
                };
                actions.push(self.send(&msg)?);
            }
            (Role::Node, Command::AckControl { seq_no, status }) => {
                if self.phase < Phase::Established {
                    return Err(E2Error::BadCommand("not established".into()));
                }
                actions.push(self.send(&E2Message::ControlAck { seq_no, status })?);
            }
            (
                Role::Ric,
                Command::Subscribe {
                    sub_id,
                    sm_id,
                    report_period_ms,
                    trigger,
                },
            ) => {
                if self.phase < Phase::Established {
                    return Err(E2Error::BadCommand("not established".into()));
                }
                self.subs.insert(
                    sub_id,
                    SubState {
                        period_ms: report_period_ms,
                        trigger,
                        next_due_ms: 0,
                        active: false,
                    },
                );
                actions.push(self.send(&E2Message::SubscriptionRequest {
                    sub_id,
                    sm_id,
                    report_period_ms,
                    trigger,
                })?);
            }
            (
                Role::Ric,
                Command::SendControl {
                    bs_id,
                    slicing,
                    scheduling,
                },
            ) => {
                if self.phase < Phase::Established {
                    return Err(E2Error::BadCommand("not established".into()));
                }
                self.tx_seq += 1;
                actions.push(self.send(&E2Message::ControlRequest {
                    bs_id,
                    seq_no: self.tx_seq,
                    slicing,
                    scheduling,
                })?);
            }
            (role, cmd) => {
                return Err(E2Error::BadCommand(format!(
                    "command {cmd:?} not valid for role {role:?}"
                )));
            }
        }
        Ok(actions)
    }

    /// Returns true when the session reset and remaining input should be
    /// discarded.
    fn handle_message(&mut self, msg: E2Message, actions: &mut Vec<Action>) -> bool {
        match (self.role, msg) {
            // --- RIC side ---
            (Role::Ric, E2Message::SetupRequest {
                bs_id,
                supported_sm_ids,
            }) => {
                if self.phase != Phase::Idle {
                    actions.push(self.reset("setup on an established session"));
                    return true;
                }
                let accepted = !supported_sm_ids.is_empty()
                    && supported_sm_ids
                        .iter()
                        .all(|sm| self.supported_sms.contains(sm));
                if let Ok(a) = self.send(&E2Message::SetupResponse { accepted }) {
                    actions.push(a);
                }
                if accepted {
                    self.bs_id = Some(bs_id);
                    self.phase = Phase::Established;
                    actions.push(Action::Deliver(E2Message::SetupRequest {
                        bs_id,
                        supported_sm_ids,
                    }));
                }
            }
            (Role::Ric, E2Message::SubscriptionResponse { sub_id, accepted }) => {
                if self.phase < Phase::Established {
                    actions.push(self.reset("subscription response before setup"));
                    return true;
                }
                if let Some(sub) = self.subs.get_mut(&sub_id) {
                    if accepted {
                        sub.active = true;
                        self.phase = Phase::Subscribed;
                    } else {
                        self.subs.remove(&sub_id);
                    }
                    actions.push(Action::Deliver(E2Message::SubscriptionResponse {
                        sub_id,
                        accepted,
                    }));
                }
            }
            (Role::Ric, E2Message::Indication {
                sub_id,
                bs_id,
                seq_no,
                payload,
            }) => {
                if self.phase != Phase::Subscribed {
                    actions.push(self.reset("indication outside Subscribed"));
                    return true;
                }
                if self.check_rx_seq(seq_no) {
                    actions.push(Action::Deliver(E2Message::Indication {
                        sub_id,
                        bs_id,
                        seq_no,
                        payload,
                    }));
                }
            }
            (Role::Ric, E2Message::ControlAck { seq_no, status }) => {
                if self.phase < Phase::Established {
                    actions.push(self.reset("ack before setup"));
                    return true;
                }
                actions.push(Action::Deliver(E2Message::ControlAck { seq_no, status }));
            }

            // --- Node side ---
            (Role::Node, E2Message::SetupResponse { accepted }) => {
                if self.phase != Phase::SetupSent {
                    actions.push(self.reset("unexpected setup response"));
                    return true;
                }
                if accepted {
                    self.phase = Phase::Established;
                } else {
                    self.phase = Phase::Idle;
                }
                actions.push(Action::Deliver(E2Message::SetupResponse { accepted }));
            }
            (Role::Node, E2Message::SubscriptionRequest {
                sub_id,
                sm_id,
                report_period_ms,
                trigger,
            }) => {
                if self.phase < Phase::Established {
                    actions.push(self.reset("subscription before setup"));
                    return true;
                }
                let accepted =
                    self.supported_sms.contains(&sm_id) && report_period_ms > 0;
                if accepted {
                    self.subs.insert(
                        sub_id,
                        SubState {
                            period_ms: report_period_ms,
                            trigger,
                            next_due_ms: self.now_ms + report_period_ms,
                            active: true,
                        },
                    );
                    self.phase = Phase::Subscribed;
                }
                if let Ok(a) = self.send(&E2Message::SubscriptionResponse { sub_id, accepted }) {
                    actions.push(a);
                }
                actions.push(Action::Deliver(E2Message::SubscriptionRequest {
                    sub_id,
                    sm_id,
                    report_period_ms,
                    trigger,
                }));
            }
            (Role::Node, E2Message::ControlRequest {
                bs_id,
                seq_no,
                slicing,
                scheduling,
            }) => {
                if self.phase < Phase::Established {
                    actions.push(self.reset("control before setup"));
                    return true;
                }
                if self.check_rx_seq(seq_no) {
                    actions.push(Action::Deliver(E2Message::ControlRequest {
                        bs_id,
                        seq_no,
                        slicing,
                        scheduling,
                    }));
                }
            }

            // Everything else is out of order for the role.
            (_, other) => {
                actions.push(self.reset(format!("unexpected {} for role", other.kind())));
                return true;
            }
        }
        false
    }

    /// Monotonicity check: true when the message is fresh, false when it is
    /// a duplicate to drop.
    fn check_rx_seq(&mut self, seq_no: u64) -> bool {
        match self.last_rx_seq {
            Some(last) if seq_no <= last => {
                self.dup_drops += 1;
                false
            }
            _ => {
                self.last_rx_seq = Some(seq_no);
                true
            }
        }
    }

    fn send(&self, msg: &E2Message) -> Result<Action, E2Error> {
        Ok(Action::Send(encode(msg)?))
    }

    fn reset(&mut self, reason: impl Into<String>) -> Action {
        self.phase = Phase::Idle;
        self.subs.clear();
        self.decoder.clear();
        Action::Reset {
            reason: reason.into(),
        }
    }
}

impl PartialOrd for Phase {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Phase {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        fn rank(p: &Phase) -> u8 {
            match p {
                Phase::Idle => 0,
                Phase::SetupSent => 1,
                Phase::Established => 2,
                Phase::Subscribed => 3,
            }
        }
        rank(self).cmp(&rank(other))
    }
}
