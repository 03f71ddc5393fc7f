//! Node registry and indication routing tables.

use std::collections::{BTreeSet, HashMap};

use e2_lite::SmId;

/// Transport connection handle, assigned by the RIC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConnId(pub u64);

/// xApp attachment handle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct XappId(pub u64);

#[derive(Debug, Clone)]
pub struct NodeEntry {
    pub conn: ConnId,
    pub supported_sms: Vec<SmId>,
    pub last_seen_ms: u64,
}

/// Registered base stations, one live session each. Re-registration under
/// the same bs_id replaces the previous session.
#[derive(Debug, Default)]
pub struct NodeRegistry {
    entries: HashMap<u32, NodeEntry>,
}

impl NodeRegistry {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, bs_id: u32) -> Option<&NodeEntry> {
        self.entries.get(&bs_id)
    }

    pub fn bs_ids(&self) -> Vec<u32> {
        let mut ids: Vec<u32> = self.entries.keys().copied().collect();
        ids.sort_unstable();
        ids
    }

    pub fn bs_of_conn(&self, conn: ConnId) -> Option<u32> {
        self.entries
            .iter()
            .find(|(_, e)| e.conn == conn)
            .map(|(&bs, _)| bs)
    }

    /// Inserts or replaces; returns the displaced connection if any.
    pub fn upsert(
        &mut self,
        bs_id: u32,
        conn: ConnId,
        sms: Vec<SmId>,
        now_ms: u64,
    ) -> Option<ConnId> {
        let old = self.entries.insert(
            bs_id,
            NodeEntry {
                conn,
                supported_sms: sms,
                last_seen_ms: now_ms,
            },
        );
        old.map(|e| e.conn).filter(|&c| c != conn)
    }

    pub fn touch(&mut self, conn: ConnId, now_ms: u64) {
        if let Some(entry) = self.entries.values_mut().find(|e| e.conn == conn) {
            entry.last_seen_ms = now_ms;
        }
    }

    pub fn remove(&mut self, bs_id: u32) -> Option<NodeEntry> {
        self.entries.remove(&bs_id)
    }

    /// Nodes silent for longer than `timeout_ms`.
    pub fn stale(&self, now_ms: u64, timeout_ms: u64) -> Vec<(u32, ConnId)> {
        let mut out: Vec<(u32, ConnId)> = self
            .entries
            .iter()
            .filter(|(_, e)| now_ms.saturating_sub(e.last_seen_ms) > timeout_ms)
            .map(|(&bs, e)| (bs, e.conn))
            .collect();
        out.sort_unstable_by_key(|&(bs, _)| bs);
        out
    }
}

/// sub_id -> owning xApp, plus the per-node subscription sets.
#[derive(Debug, Default)]
pub struct RouteTable {
    by_sub: HashMap<u64, XappId>,
    by_bs: HashMap<u32, BTreeSet<u64>>,
}

impl RouteTable {
    pub fn install(&mut self, sub_id: u64, bs_id: u32, xapp: XappId) {
        self.by_sub.insert(sub_id, xapp);
        self.by_bs.entry(bs_id).or_default().insert(sub_id);
    }

    pub fn route(&self, sub_id: u64) -> Option<XappId> {
        self.by_sub.get(&sub_id).copied()
    }

    pub fn remove_sub(&mut self, sub_id: u64) {
        self.by_sub.remove(&sub_id);
        for subs in self.by_bs.values_mut() {
            subs.remove(&sub_id);
        }
    }

    /// Drops every route of a node; returns the removed sub ids.
    pub fn remove_bs(&mut self, bs_id: u32) -> Vec<u64> {
        let subs: Vec<u64> = self
            .by_bs
            .remove(&bs_id)
            .map(|s| s.into_iter().collect())
            .unwrap_or_default();
        for sub in &subs {
            self.by_sub.remove(sub);
        }
        subs
    }

    pub fn subs_of(&self, bs_id: u32) -> Vec<u64> {
        self.by_bs
            .get(&bs_id)
            .map(|s| s.iter().copied().collect())
            .unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.by_sub.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_sub.is_empty()
    }
}
