//! Per-xApp metrics log, exported as CSV.

use std::io::Write;
use std::path::Path;

use sim_core::SliceId;

use crate::reward::WindowAggregate;
use crate::XappError;

/// One row per indication: timestamp, chosen action, reward and the
/// per-slice KPM aggregates.
#[derive(Debug, Clone)]
pub struct MetricsRow {
    pub timestamp_ms: u64,
    pub action_idx: Option<usize>,
    pub reward: f64,
    pub agg: WindowAggregate,
}

#[derive(Debug, Default)]
pub struct MetricsLog {
    pub rows: Vec<MetricsRow>,
}

pub const METRICS_HEADER: &str = "timestamp_ms,action_idx,reward,\
embb_rate_bps,embb_buffer_bytes,embb_phy_tbs,embb_prb_ratio,\
mtc_rate_bps,mtc_buffer_bytes,mtc_phy_tbs,mtc_prb_ratio,\
urllc_rate_bps,urllc_buffer_bytes,urllc_phy_tbs,urllc_prb_ratio";

impl MetricsLog {
    pub fn push(&mut self, row: MetricsRow) {
        self.rows.push(row);
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), XappError> {
        let mut out = std::io::BufWriter::new(
            std::fs::File::create(path).map_err(|e| XappError::Io(e.to_string()))?,
        );
        writeln!(out, "{METRICS_HEADER}").map_err(|e| XappError::Io(e.to_string()))?;
        for r in &self.rows {
            let action = r
                .action_idx
                .map(|a| a.to_string())
                .unwrap_or_default();
            write!(out, "{},{},{}", r.timestamp_ms, action, r.reward)
                .map_err(|e| XappError::Io(e.to_string()))?;
            for slice in SliceId::ALL {
                let s = r.agg.slice(slice);
                write!(
                    out,
                    ",{},{},{},{}",
                    s.dl_rate_bps,
                    s.dl_buffer_bytes,
                    s.dl_phy_tbs,
                    s.prb_ratio()
                )
                .map_err(|e| XappError::Io(e.to_string()))?;
            }
            writeln!(out).map_err(|e| XappError::Io(e.to_string()))?;
        }
        out.flush().map_err(|e| XappError::Io(e.to_string()))
    }
}
