//! Window aggregation and the reward functions of the two control xApps.

use serde::{Deserialize, Serialize};
use sim_core::{KpmRecord, ScenarioConfig, SliceId, TrafficProfile};

/// One slice's UE-summed totals over a reporting window.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SliceWindow {
    pub dl_rate_bps: f64,
    pub dl_buffer_bytes: f64,
    pub dl_phy_tbs: f64,
    pub dl_tx_symbols: f64,
    pub granted_prbs: f64,
    pub requested_prbs: f64,
}

impl SliceWindow {
    /// Granted-to-requested PRB quotient, clipped to [0, 1]. A window with
    /// no demand counts as fully satisfied.
    pub fn prb_ratio(&self) -> f64 {
        if self.requested_prbs <= 0.0 {
            1.0
        } else {
            (self.granted_prbs / self.requested_prbs).clamp(0.0, 1.0)
        }
    }
}

/// Slice-aggregated view of one indication.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct WindowAggregate {
    pub timestamp_ms: u64,
    pub bs_id: u32,
    pub per_slice: [SliceWindow; 3],
}

impl WindowAggregate {
    pub fn slice(&self, s: SliceId) -> &SliceWindow {
        &self.per_slice[s.index()]
    }
}

/// Sums one reporting window's records per slice.
pub fn aggregate(records: &[KpmRecord]) -> WindowAggregate {
    let mut agg = WindowAggregate::default();
    for r in records {
        agg.timestamp_ms = r.timestamp_ms;
        agg.bs_id = r.bs_id;
        let s = &mut agg.per_slice[r.slice.index()];
        s.dl_rate_bps += r.dl_rate_bps;
        s.dl_buffer_bytes += r.dl_buffer_bytes as f64;
        s.dl_phy_tbs += r.dl_phy_tbs as f64;
        s.dl_tx_symbols += r.dl_tx_symbols as f64;
        s.granted_prbs += r.granted_prbs as f64;
        s.requested_prbs += r.requested_prbs as f64;
    }
    agg
}

/// Per-UE offered load in bits/s for a slice under the scenario's traffic
/// profile.
pub fn offered_bps_per_ue(cfg: &ScenarioConfig, slice: SliceId) -> f64 {
    match cfg.traffic_profile {
        TrafficProfile::Uniform => cfg.rates.uniform_bps,
        TrafficProfile::SliceBased => match slice {
            SliceId::Embb => cfg.rates.embb_bps,
            SliceId::Mtc => cfg.rates.mtc_bps,
            SliceId::Urllc => cfg.rates.urllc_bps,
        },
    }
}

/// Composite reward of the joint slicing+scheduling controller: maximize
/// eMBB rate and MTC transport blocks, minimize the URLLC buffer, each
/// normalized by its reference scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardSpec {
    /// eMBB slice offered load, bits/s.
    pub rate_ref: f64,
    /// MTC offered packets per reporting window.
    pub tbs_ref: f64,
    /// One reporting window of offered URLLC bytes.
    pub buf_ref: f64,
    pub weights: [f64; 3],
}

impl RewardSpec {
    /// References derived from the scenario's offered load. The TB
    /// reference is the saturation count (one block per UE per TTI), which
    /// keeps the MTC term inside [0, 1]: a fully backlogged slice scores 1
    /// instead of growing without bound as its queue fragments into
    /// per-TTI blocks.
    pub fn from_scenario(cfg: &ScenarioConfig) -> Self {
        let ues = f64::from(cfg.ues_per_slice_per_bs);
        let window_s = cfg.reporting_period_ms as f64 / 1000.0;
        let embb_bps = offered_bps_per_ue(cfg, SliceId::Embb) * ues;
        let tbs_cap = ues * cfg.window_ttis() as f64;
        let urllc_bytes = offered_bps_per_ue(cfg, SliceId::Urllc) / 8.0 * ues * window_s;
        Self {
            rate_ref: embb_bps,
            tbs_ref: tbs_cap,
            buf_ref: urllc_bytes,
            weights: [1.0, 1.0, 1.0],
        }
    }

    pub fn compute(&self, w: &WindowAggregate) -> f64 {
        let embb = w.slice(SliceId::Embb).dl_rate_bps / self.rate_ref;
        let mtc = w.slice(SliceId::Mtc).dl_phy_tbs / self.tbs_ref;
        let urllc = w.slice(SliceId::Urllc).dl_buffer_bytes / self.buf_ref;
        self.weights[0] * embb + self.weights[1] * mtc - self.weights[2] * urllc
    }
}

/// Per-slice reward of the scheduling-only xApp: rate for eMBB and MTC,
/// PRB satisfaction for URLLC.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchedRewardSpec {
    pub embb_rate_ref: f64,
    pub mtc_rate_ref: f64,
}

impl SchedRewardSpec {
    pub fn from_scenario(cfg: &ScenarioConfig) -> Self {
        let ues = f64::from(cfg.ues_per_slice_per_bs);
        Self {
            embb_rate_ref: offered_bps_per_ue(cfg, SliceId::Embb) * ues,
            mtc_rate_ref: offered_bps_per_ue(cfg, SliceId::Mtc) * ues,
        }
    }

    pub fn compute_slice(&self, slice: SliceId, w: &WindowAggregate) -> f64 {
        match slice {
            SliceId::Embb => w.slice(slice).dl_rate_bps / self.embb_rate_ref,
            SliceId::Mtc => w.slice(slice).dl_rate_bps / self.mtc_rate_ref,
            SliceId::Urllc => w.slice(slice).prb_ratio(),
        }
    }
}
