//! The per-UE, per-reporting-window KPM record.

use serde::{Deserialize, Serialize};

use crate::slice::SliceId;

/// One row of telemetry: identifiers plus the nine tracked metrics and the
/// PRB grant accounting. Rate fields are window averages; buffer fields are
/// the instantaneous state at snapshot time; MCS/CQI are window means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpmRecord {
    pub timestamp_ms: u64,
    pub bs_id: u32,
    pub ue_id: u32,
    pub slice: SliceId,
    pub dl_mcs: f64,
    pub dl_tx_symbols: u64,
    pub dl_buffer_bytes: u64,
    pub dl_rate_bps: f64,
    pub dl_phy_tbs: u64,
    pub dl_cqi: f64,
    pub ul_buffer_bytes: u64,
    pub ul_rate_bps: f64,
    pub ul_errors: u64,
    pub granted_prbs: u64,
    pub requested_prbs: u64,
}

/// Names of the nine tracked KPM metrics, in the canonical order used by
/// correlation reports.
pub const TRACKED_METRICS: [&str; 9] = [
    "dl_mcs",
    "dl_tx_symbols",
    "dl_buffer_bytes",
    "dl_rate_bps",
    "dl_phy_tbs",
    "dl_cqi",
    "ul_buffer_bytes",
    "ul_rate_bps",
    "ul_errors",
];

impl KpmRecord {
    /// Metric accessor by column name; `None` for unknown names.
    pub fn metric(&self, name: &str) -> Option<f64> {
        Some(match name {
            "timestamp_ms" => self.timestamp_ms as f64,
            "bs_id" => f64::from(self.bs_id),
            "ue_id" => f64::from(self.ue_id),
            "dl_mcs" => self.dl_mcs,
            "dl_tx_symbols" => self.dl_tx_symbols as f64,
            "dl_buffer_bytes" => self.dl_buffer_bytes as f64,
            "dl_rate_bps" => self.dl_rate_bps,
            "dl_phy_tbs" => self.dl_phy_tbs as f64,
            "dl_cqi" => self.dl_cqi,
            "ul_buffer_bytes" => self.ul_buffer_bytes as f64,
            "ul_rate_bps" => self.ul_rate_bps,
            "ul_errors" => self.ul_errors as f64,
            "granted_prbs" => self.granted_prbs as f64,
            "requested_prbs" => self.requested_prbs as f64,
            _ => return None,
        })
    }
}
