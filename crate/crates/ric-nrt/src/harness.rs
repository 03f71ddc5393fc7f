//! In-process closed-loop harness: simulated cells, their node-side E2
//! sessions and one RIC, advanced millisecond by millisecond on a simulated
//! clock. Bytes shuttle synchronously within a step, so a control issued in
//! reaction to an indication lands at the cell in the same millisecond and
//! takes effect at the next TTI boundary.

use e2_lite::{Action, Command, ControlStatus, E2Message, Event, Phase, Role, Session, SmId};
use sim_core::{build_cell, CellState, KpmRecord, ScenarioConfig};

use crate::registry::{ConnId, XappId};
use crate::ric::{Ric, RicConfig};
use crate::xapp::XappEvent;
use crate::RicError;

/// One emulated base station: cell plus its E2 termination.
pub struct NodeSim {
    pub cell: CellState,
    session: Session,
    conn: ConnId,
    /// Snapshot cache so several subscriptions due at the same instant see
    /// the same reporting window instead of resetting each other.
    last_snapshot: Option<(u64, Vec<KpmRecord>)>,
}

impl NodeSim {
    fn snapshot_at(&mut self, now_ms: u64) -> Vec<KpmRecord> {
        if let Some((t, records)) = &self.last_snapshot {
            if *t == now_ms {
                return records.clone();
            }
        }
        let records = self.cell.snapshot_kpms();
        self.last_snapshot = Some((now_ms, records.clone()));
        records
    }

    /// Applies node-side session actions; control requests hit the cell.
    fn handle_actions(
        &mut self,
        now_ms: u64,
        actions: Vec<Action>,
        to_ric: &mut Vec<Vec<u8>>,
    ) {
        for action in actions {
            match action {
                Action::Send(bytes) => to_ric.push(bytes),
                Action::ReportDue { sub_id } => {
                    let records = self.snapshot_at(now_ms);
                    if let Ok(more) = self.session.step(
                        now_ms,
                        Event::Command(Command::SendIndication { sub_id, records }),
                    ) {
                        self.handle_actions(now_ms, more, to_ric);
                    }
                }
                Action::Deliver(E2Message::ControlRequest {
                    seq_no,
                    slicing,
                    scheduling,
                    ..
                }) => {
                    let status = match self.cell.apply_control(slicing, scheduling) {
                        Ok(()) => ControlStatus::Ok,
                        Err(_) => ControlStatus::Rejected,
                    };
                    if let Ok(more) = self.session.step(
                        now_ms,
                        Event::Command(Command::AckControl { seq_no, status }),
                    ) {
                        self.handle_actions(now_ms, more, to_ric);
                    }
                }
                Action::Deliver(_) | Action::Reset { .. } => {}
            }
        }
    }
}

/// Cells, node sessions and the RIC on one simulated clock.
pub struct ClosedLoop {
    pub ric: Ric,
    nodes: Vec<NodeSim>,
    now_ms: u64,
    /// When false, a node ignores RIC bytes (for timeout tests).
    pub responsive: Vec<bool>,
}

impl ClosedLoop {
    /// Builds `cfg.n_bs` cells and registers them with the RIC via the
    /// regular setup handshake.
    pub fn new(cfg: &ScenarioConfig, ric_cfg: RicConfig) -> Result<Self, RicError> {
        assert_eq!(cfg.tti_ms, 1, "harness steps one TTI per millisecond");
        let mut loop_ = Self {
            ric: Ric::new(ric_cfg),
            nodes: Vec::new(),
            now_ms: 0,
            responsive: vec![true; cfg.n_bs as usize],
        };
        for bs_id in 0..cfg.n_bs {
            let cell = build_cell(cfg, bs_id).map_err(|e| RicError::Harness(e.to_string()))?;
            let conn = loop_.ric.node_connected();
            let mut session = Session::new(Role::Node);
            let actions = session
                .step(
                    0,
                    Event::Command(Command::StartSetup {
                        bs_id,
                        sms: SmId::ALL.to_vec(),
                    }),
                )
                .map_err(RicError::Session)?;
            let mut node = NodeSim {
                cell,
                session,
                conn,
                last_snapshot: None,
            };
            let mut to_ric = Vec::new();
            node.handle_actions(0, actions, &mut to_ric);
            loop_.nodes.push(node);
            for bytes in to_ric {
                loop_.ric.node_bytes_in(0, conn, &bytes);
            }
            loop_.pump(0);
            if loop_.nodes[bs_id as usize].session.phase() < Phase::Established {
                return Err(RicError::Harness(format!("bs {bs_id} failed setup")));
            }
        }
        Ok(loop_)
    }

    pub fn now_ms(&self) -> u64 {
        self.now_ms
    }

    pub fn cell(&self, bs_id: u32) -> &CellState {
        &self.nodes[bs_id as usize].cell
    }

    pub fn cell_mut(&mut self, bs_id: u32) -> &mut CellState {
        &mut self.nodes[bs_id as usize].cell
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Delivers RIC-bound and node-bound bytes until both sides go quiet.
    fn pump(&mut self, now_ms: u64) {
        for _ in 0..8 {
            let outgoing = self.ric.drain_outbox();
            if outgoing.is_empty() {
                break;
            }
            let mut to_ric: Vec<(ConnId, Vec<u8>)> = Vec::new();
            for (conn, bytes) in outgoing {
                let Some(idx) = self.nodes.iter().position(|n| n.conn == conn) else {
                    continue;
                };
                if !self.responsive[idx] {
                    continue;
                }
                let node = &mut self.nodes[idx];
                if let Ok(actions) = node.session.step(now_ms, Event::BytesIn(&bytes)) {
                    let mut replies = Vec::new();
                    node.handle_actions(now_ms, actions, &mut replies);
                    for r in replies {
                        to_ric.push((conn, r));
                    }
                }
            }
            for (conn, bytes) in to_ric {
                self.ric.node_bytes_in(now_ms, conn, &bytes);
            }
        }
    }

    /// Advances simulated time by one millisecond: cells step one TTI,
    /// node timers fire (emitting due reports), and all protocol traffic
    /// settles.
    pub fn step_ms(&mut self) {
        self.now_ms += 1;
        let now = self.now_ms;
        let mut inbound: Vec<(ConnId, Vec<u8>)> = Vec::new();
        for (idx, node) in self.nodes.iter_mut().enumerate() {
            node.cell.step_tti();
            if let Ok(actions) = node.session.step(now, Event::Timer) {
                let mut to_ric = Vec::new();
                node.handle_actions(now, actions, &mut to_ric);
                if self.responsive[idx] {
                    for bytes in to_ric {
                        inbound.push((node.conn, bytes));
                    }
                }
            }
        }
        for (conn, bytes) in inbound {
            self.ric.node_bytes_in(now, conn, &bytes);
        }
        self.pump(now);
        self.ric.tick(now);
        self.pump(now);
    }

    pub fn run_ms(&mut self, ms: u64) {
        for _ in 0..ms {
            self.step_ms();
        }
    }

    /// Subscribes an xApp to every registered node at the same period.
    pub fn subscribe_all(&mut self, xapp: XappId, period_ms: u64) -> Result<Vec<u64>, RicError> {
        let mut subs = Vec::new();
        for bs_id in self.ric.registry().bs_ids() {
            let sub = self
                .ric
                .subscribe(self.now_ms, xapp, bs_id, SmId::KpmReport, period_ms)?;
            subs.push(sub);
        }
        self.pump(self.now_ms);
        Ok(subs)
    }

    pub fn send_control(
        &mut self,
        xapp: XappId,
        bs_id: u32,
        slicing: sim_core::SlicingProfile,
        scheduling: sim_core::SchedulingProfile,
    ) -> Result<u64, RicError> {
        let token = self
            .ric
            .send_control(self.now_ms, xapp, bs_id, slicing, scheduling)?;
        self.pump(self.now_ms);
        Ok(token)
    }

    pub fn poll_xapp(&mut self, xapp: XappId) -> Option<XappEvent> {
        self.ric.poll_xapp(xapp)
    }
}
