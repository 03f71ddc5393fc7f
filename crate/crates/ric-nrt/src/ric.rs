//! The RIC service core.
//!
//! A single state machine over all node sessions, the registry, the route
//! table and the xApp mailboxes. Outgoing bytes accumulate in an outbox the
//! transport layer drains, so the core works identically under the
//! in-process simulated-time harness and the TCP front-end (which wraps it
//! in a mutex: updates stay linearizable, per-session handling stays
//! ordered).

use std::collections::HashMap;

use e2_lite::{Action, Command, E2Message, Event, Role, Session, SmId, TriggerKind};
use sim_core::{KpmRecord, SchedulingProfile, SlicingProfile};

use crate::events::EventLog;
use crate::registry::{ConnId, NodeRegistry, RouteTable, XappId};
use crate::xapp::{ControlOutcome, Mailbox, XappEvent};
use crate::RicError;

/// Concurrent-control arbitration across xApps targeting one cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Arbitration {
    /// First xApp to control a cell owns it; others are refused.
    #[default]
    Exclusive,
    LastWriterWins,
}

#[derive(Debug, Clone)]
pub struct RicConfig {
    pub xapp_queue_cap: usize,
    /// Ack correlation deadline; one reporting period by default.
    pub control_deadline_ms: u64,
    /// Nodes silent for longer are evicted.
    pub node_timeout_ms: u64,
    pub arbitration: Arbitration,
}

impl Default for RicConfig {
    fn default() -> Self {
        Self {
            xapp_queue_cap: 64,
            control_deadline_ms: 250,
            node_timeout_ms: 2000,
            arbitration: Arbitration::Exclusive,
        }
    }
}

#[derive(Debug)]
struct SubInfo {
    xapp: XappId,
    bs_id: u32,
    active: bool,
}

#[derive(Debug)]
struct PendingControl {
    xapp: XappId,
    bs_id: u32,
    expires_ms: u64,
}

pub struct Ric {
    pub cfg: RicConfig,
    now_ms: u64,
    conns: HashMap<ConnId, Session>,
    next_conn: u64,
    next_sub: u64,
    next_xapp: u64,
    registry: NodeRegistry,
    routes: RouteTable,
    subs: HashMap<u64, SubInfo>,
    xapps: HashMap<XappId, Mailbox>,
    pending_controls: HashMap<(ConnId, u64), PendingControl>,
    controllers: HashMap<u32, XappId>,
    outbox: Vec<(ConnId, Vec<u8>)>,
    pub events: EventLog,
}

impl Ric {
    pub fn new(cfg: RicConfig) -> Self {
        Self {
            cfg,
            now_ms: 0,
            conns: HashMap::new(),
            next_conn: 0,
            next_sub: 0,
            next_xapp: 0,
            registry: NodeRegistry::default(),
            routes: RouteTable::default(),
            subs: HashMap::new(),
            xapps: HashMap::new(),
            pending_controls: HashMap::new(),
            controllers: HashMap::new(),
            outbox: Vec::new(),
            events: EventLog::new(),
        }
    }

    pub fn now_ms(&self) -> u64 {
        self.now_ms
    }

    pub fn registry(&self) -> &NodeRegistry {
        &self.registry
    }

    pub fn routes(&self) -> &RouteTable {
        &self.routes
    }

    /// A new transport connection; bytes from it feed `node_bytes_in`.
    pub fn node_connected(&mut self) -> ConnId {
        let id = ConnId(self.next_conn);
        self.next_conn += 1;
        self.conns.insert(id, Session::new(Role::Ric));
        id
    }

    pub fn node_disconnected(&mut self, conn: ConnId) {
        self.conns.remove(&conn);
        if let Some(bs_id) = self.registry.bs_of_conn(conn) {
            self.drop_node(bs_id, "disconnect");
        }
    }

    /// Feeds bytes from a node connection through its session; replies and
    /// routed deliveries land in the outbox and the xApp mailboxes.
    pub fn node_bytes_in(&mut self, now_ms: u64, conn: ConnId, bytes: &[u8]) {
        self.now_ms = self.now_ms.max(now_ms);
        let Some(session) = self.conns.get_mut(&conn) else {
            return;
        };
        let actions = match session.step(now_ms, Event::BytesIn(bytes)) {
            Ok(a) => a,
            Err(_) => return,
        };
        self.registry.touch(conn, now_ms);
        for action in actions {
            self.apply_session_action(conn, action);
        }
    }

    fn apply_session_action(&mut self, conn: ConnId, action: Action) {
        match action {
            Action::Send(bytes) => self.outbox.push((conn, bytes)),
            Action::ReportDue { .. } => {}
            Action::Reset { reason } => {
                self.events
                    .log(self.now_ms, "session_reset", &[("reason", reason)]);
                if let Some(bs_id) = self.registry.bs_of_conn(conn) {
                    self.drop_node(bs_id, "session_reset");
                }
            }
            Action::Deliver(msg) => self.deliver(conn, msg),
        }
    }

    fn deliver(&mut self, conn: ConnId, msg: E2Message) {
        match msg {
            E2Message::SetupRequest {
                bs_id,
                supported_sm_ids,
            } => self.register_node(conn, bs_id, supported_sm_ids),
            E2Message::SubscriptionResponse { sub_id, accepted } => {
                let Some(info) = self.subs.get_mut(&sub_id) else {
                    return;
                };
                let (xapp, bs_id) = (info.xapp, info.bs_id);
                if accepted {
                    info.active = true;
                    self.routes.install(sub_id, bs_id, xapp);
                    self.events.log(
                        self.now_ms,
                        "sub_active",
                        &[("sub", sub_id.to_string()), ("bs", bs_id.to_string())],
                    );
                } else {
                    self.subs.remove(&sub_id);
                    self.events
                        .log(self.now_ms, "sub_rejected", &[("sub", sub_id.to_string())]);
                }
                self.push_xapp(
                    xapp,
                    XappEvent::SubscriptionResult {
                        sub_id,
                        bs_id,
                        accepted,
                    },
                );
            }
            E2Message::Indication {
                sub_id,
                bs_id,
                seq_no,
                payload,
            } => {
                self.route_indication(sub_id, bs_id, seq_no, payload);
            }
            E2Message::ControlAck { seq_no, status } => {
                match self.pending_controls.remove(&(conn, seq_no)) {
                    Some(p) => {
                        self.events.log(
                            self.now_ms,
                            "control_acked",
                            &[
                                ("seq", seq_no.to_string()),
                                ("status", format!("{status:?}")),
                            ],
                        );
                        self.push_xapp(
                            p.xapp,
                            XappEvent::ControlResult {
                                token: seq_no,
                                bs_id: p.bs_id,
                                outcome: ControlOutcome::Acked(status),
                            },
                        );
                    }
                    None => {
                        self.events.log(
                            self.now_ms,
                            "control_ack_unmatched",
                            &[("seq", seq_no.to_string())],
                        );
                    }
                }
            }
            other => {
                self.events.log(
                    self.now_ms,
                    "unexpected_delivery",
                    &[("kind", other.kind().to_string())],
                );
            }
        }
    }

    /// Handles a node's setup: updates the registry, closing any previous
    /// session registered under the same bs_id. The session layer has
    /// already validated the SM list and emitted the SetupResponse.
    pub fn register_node(&mut self, conn: ConnId, bs_id: u32, sms: Vec<SmId>) {
        if let Some(old_conn) = self.registry.upsert(bs_id, conn, sms, self.now_ms) {
            self.conns.remove(&old_conn);
            for sub in self.routes.remove_bs(bs_id) {
                self.subs.remove(&sub);
            }
            self.events
                .log(self.now_ms, "node_replaced", &[("bs", bs_id.to_string())]);
        } else {
            self.events
                .log(self.now_ms, "node_registered", &[("bs", bs_id.to_string())]);
        }
    }

    /// Routes one indication to its subscriber queue. Returns the delivery
    /// count: 1, or 0 for unknown subscriptions (logged and dropped).
    pub fn route_indication(
        &mut self,
        sub_id: u64,
        bs_id: u32,
        seq_no: u64,
        records: Vec<KpmRecord>,
    ) -> usize {
        let Some(xapp) = self.routes.route(sub_id) else {
            self.events.log(
                self.now_ms,
                "ind_unknown_sub",
                &[("sub", sub_id.to_string())],
            );
            return 0;
        };
        self.push_xapp(
            xapp,
            XappEvent::Indication {
                sub_id,
                bs_id,
                seq_no,
                records,
            },
        );
        1
    }

    fn push_xapp(&mut self, xapp: XappId, ev: XappEvent) {
        let Some(mb) = self.xapps.get_mut(&xapp) else {
            return;
        };
        let before = mb.drops;
        mb.push(ev);
        if mb.drops > before {
            let name = mb.name.clone();
            self.events
                .log(self.now_ms, "queue_drop", &[("xapp", name)]);
        }
    }

    /// Timer processing: control-ack deadlines and node liveness eviction.
    pub fn tick(&mut self, now_ms: u64) {
        self.now_ms = self.now_ms.max(now_ms);
        let expired: Vec<(ConnId, u64)> = self
            .pending_controls
            .iter()
            .filter(|(_, p)| self.now_ms >= p.expires_ms)
            .map(|(&k, _)| k)
            .collect();
        for key in expired {
            let p = self.pending_controls.remove(&key).unwrap();
            self.events.log(
                self.now_ms,
                "control_timeout",
                &[("seq", key.1.to_string()), ("bs", p.bs_id.to_string())],
            );
            self.push_xapp(
                p.xapp,
                XappEvent::ControlResult {
                    token: key.1,
                    bs_id: p.bs_id,
                    outcome: ControlOutcome::Timeout,
                },
            );
        }
        for (bs_id, _) in self.registry.stale(self.now_ms, self.cfg.node_timeout_ms) {
            self.drop_node(bs_id, "stale");
        }
    }

    fn drop_node(&mut self, bs_id: u32, why: &str) {
        if let Some(entry) = self.registry.remove(bs_id) {
            self.conns.remove(&entry.conn);
        }
        let mut owners: Vec<XappId> = Vec::new();
        for sub in self.routes.remove_bs(bs_id) {
            if let Some(info) = self.subs.remove(&sub) {
                owners.push(info.xapp);
            }
        }
        owners.sort_unstable();
        owners.dedup();
        for xapp in owners {
            self.push_xapp(xapp, XappEvent::NodeGone { bs_id });
        }
        self.controllers.remove(&bs_id);
        self.events.log(
            self.now_ms,
            "node_evicted",
            &[("bs", bs_id.to_string()), ("why", why.to_string())],
        );
    }

    /// Outgoing bytes for the transport layer to deliver, in order.
    pub fn drain_outbox(&mut self) -> Vec<(ConnId, Vec<u8>)> {
        std::mem::take(&mut self.outbox)
    }

    // --- xApp surface ---

    pub fn attach_xapp(&mut self, name: &str) -> XappId {
        let id = XappId(self.next_xapp);
        self.next_xapp += 1;
        self.xapps
            .insert(id, Mailbox::new(name, self.cfg.xapp_queue_cap));
        self.events
            .log(self.now_ms, "xapp_attached", &[("name", name.to_string())]);
        id
    }

    /// Requests a KPM subscription on a registered node. The sub id is
    /// assigned immediately; the route activates when the node accepts
    /// (a SubscriptionResult event follows either way).
    pub fn subscribe(
        &mut self,
        now_ms: u64,
        xapp: XappId,
        bs_id: u32,
        sm_id: SmId,
        period_ms: u64,
    ) -> Result<u64, RicError> {
        self.now_ms = self.now_ms.max(now_ms);
        if !self.xapps.contains_key(&xapp) {
            return Err(RicError::NoSuchXapp);
        }
        let entry = self.registry.get(bs_id).ok_or(RicError::NoSuchNode { bs_id })?;
        let conn = entry.conn;
        let sub_id = self.next_sub;
        self.next_sub += 1;
        let session = self.conns.get_mut(&conn).ok_or(RicError::NoSuchNode { bs_id })?;
        let actions = session
            .step(
                now_ms,
                Event::Command(Command::Subscribe {
                    sub_id,
                    sm_id,
                    report_period_ms: period_ms,
                    trigger: TriggerKind::Periodic,
                }),
            )
            .map_err(RicError::Session)?;
        self.subs.insert(
            sub_id,
            SubInfo {
                xapp,
                bs_id,
                active: false,
            },
        );
        self.events.log(
            self.now_ms,
            "sub_requested",
            &[("sub", sub_id.to_string()), ("bs", bs_id.to_string())],
        );
        for a in actions {
            self.apply_session_action(conn, a);
        }
        Ok(sub_id)
    }

    /// Frames and sends a control request; the returned token correlates
    /// the eventual ControlResult event (ack or deadline timeout).
    pub fn send_control(
        &mut self,
        now_ms: u64,
        xapp: XappId,
        bs_id: u32,
        slicing: SlicingProfile,
        scheduling: SchedulingProfile,
    ) -> Result<u64, RicError> {
        self.now_ms = self.now_ms.max(now_ms);
        if !self.xapps.contains_key(&xapp) {
            return Err(RicError::NoSuchXapp);
        }
        let entry = self.registry.get(bs_id).ok_or(RicError::NoSuchNode { bs_id })?;
        let conn = entry.conn;
        match self.cfg.arbitration {
            Arbitration::Exclusive => match self.controllers.get(&bs_id) {
                Some(&holder) if holder != xapp => {
                    return Err(RicError::ControlConflict { holder: holder.0 });
                }
                _ => {
                    self.controllers.insert(bs_id, xapp);
                }
            },
            Arbitration::LastWriterWins => {
                self.controllers.insert(bs_id, xapp);
            }
        }
        let session = self.conns.get_mut(&conn).ok_or(RicError::NoSuchNode { bs_id })?;
        let actions = session
            .step(
                now_ms,
                Event::Command(Command::SendControl {
                    bs_id,
                    slicing,
                    scheduling,
                }),
            )
            .map_err(RicError::Session)?;
        let seq = session.last_tx_seq();
        self.pending_controls.insert(
            (conn, seq),
            PendingControl {
                xapp,
                bs_id,
                expires_ms: self.now_ms + self.cfg.control_deadline_ms,
            },
        );
        self.events.log(
            self.now_ms,
            "control_sent",
            &[("seq", seq.to_string()), ("bs", bs_id.to_string())],
        );
        for a in actions {
            self.apply_session_action(conn, a);
        }
        Ok(seq)
    }

    pub fn poll_xapp(&mut self, xapp: XappId) -> Option<XappEvent> {
        self.xapps.get_mut(&xapp)?.pop()
    }

    pub fn xapp_queue_len(&self, xapp: XappId) -> usize {
        self.xapps.get(&xapp).map(|m| m.len()).unwrap_or(0)
    }

    pub fn xapp_drops(&self, xapp: XappId) -> u64 {
        self.xapps.get(&xapp).map(|m| m.drops).unwrap_or(0)
    }

    /// Sum of duplicate frames dropped across sessions.
    pub fn dup_drops(&self) -> u64 {
        self.conns.values().map(|s| s.dup_drops).sum()
    }
}
