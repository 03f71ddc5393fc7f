//! xApp attachment surface: bounded per-xApp event queues.

use std::collections::VecDeque;

use e2_lite::ControlStatus;
use sim_core::KpmRecord;

/// What a control attempt came back with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlOutcome {
    Acked(ControlStatus),
    /// No ack arrived within the correlation deadline.
    Timeout,
}

/// Events delivered to an attached xApp, drained via `Ric::poll_xapp`.
#[derive(Debug, Clone)]
pub enum XappEvent {
    Indication {
        sub_id: u64,
        bs_id: u32,
        seq_no: u64,
        records: Vec<KpmRecord>,
    },
    SubscriptionResult {
        sub_id: u64,
        bs_id: u32,
        accepted: bool,
    },
    ControlResult {
        token: u64,
        bs_id: u32,
        outcome: ControlOutcome,
    },
    NodeGone {
        bs_id: u32,
    },
}

/// Bounded FIFO; overflow drops the oldest event and counts it. Telemetry
/// freshness beats completeness for near-real-time control.
#[derive(Debug)]
pub struct Mailbox {
    pub name: String,
    queue: VecDeque<XappEvent>,
    cap: usize,
    pub drops: u64,
}

impl Mailbox {
    pub fn new(name: &str, cap: usize) -> Self {
        Self {
            name: name.to_string(),
            queue: VecDeque::with_capacity(cap.min(1024)),
            cap: cap.max(1),
            drops: 0,
        }
    }

    pub fn push(&mut self, ev: XappEvent) {
        if self.queue.len() == self.cap {
            self.queue.pop_front();
            self.drops += 1;
        }
        self.queue.push_back(ev);
    }

    pub fn pop(&mut self) -> Option<XappEvent> {
        self.queue.pop_front()
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }
}
