//! One base station: UEs, buffers, channel walks, per-TTI scheduling and
//! KPM accumulation.
//!
//! Every TTI runs the same fixed sequence: apply any staged control, enqueue
//! source traffic, advance the channel walks, schedule each slice inside its
//! PRB mask, drain the scheduled transport blocks, then update accumulators
//! and the uplink side-model. All randomness comes from one ChaCha stream
//! seeded from `(rng_seed, bs_id)`, so identical configurations replay
//! bit-identical KPM streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::channel::{tb_size, ChannelState, SYMBOLS_PER_PRB};
use crate::config::ScenarioConfig;
use crate::kpm::KpmRecord;
use crate::sched::{schedule_slice, SchedUe};
use crate::slice::{SchedulingProfile, SliceId, SlicingProfile};
use crate::traffic::TrafficSource;
use crate::SimError;

/// Smoothing factor for the PF average-rate tracker (100 ms time constant
/// at a 1 ms TTI).
const EWMA_ALPHA: f64 = 0.01;

#[derive(Debug, Clone, Default)]
struct KpmAccum {
    tx_symbols: u64,
    phy_tbs: u64,
    delivered_bits: u64,
    granted_prbs: u64,
    requested_prbs: u64,
    mcs_sum: f64,
    cqi_sum: f64,
    ttis: u64,
    ul_delivered_bits: u64,
    ul_errors: u64,
}

/// Mutable per-UE state.
#[derive(Debug, Clone)]
pub struct UeState {
    pub ue_id: u32,
    pub slice: SliceId,
    pub dl_buffer_bytes: u64,
    pub ewma_rate_bps: f64,
    pub ul_buffer_bytes: u64,
    traffic: TrafficSource,
    channel: ChannelState,
    ul_arrivals: TrafficSource,
    ul_capacity_bytes_per_tti: f64,
    ul_drain_carry: f64,
    acc: KpmAccum,
}

impl UeState {
    pub fn cqi(&self) -> u8 {
        self.channel.cqi
    }

    pub fn mcs(&self) -> u8 {
        self.channel.mcs()
    }
}

/// Counters a cell keeps across its lifetime (not reset by snapshots).
#[derive(Debug, Clone, Default)]
pub struct CellCounters {
    pub arrived_bytes: u64,
    pub delivered_bytes: u64,
    pub rejected_controls: u64,
}

/// One emulated base station.
#[derive(Debug, Clone)]
pub struct CellState {
    pub bs_id: u32,
    cfg: ScenarioConfig,
    ues: Vec<UeState>,
    slicing: SlicingProfile,
    scheduling: SchedulingProfile,
    pending_control: Option<(SlicingProfile, SchedulingProfile)>,
    rr_cursors: [usize; 3],
    now_ms: u64,
    window_start_ms: u64,
    rng: ChaCha8Rng,
    pub counters: CellCounters,
}

/// Builds a cell from a validated scenario config. UE ids are assigned
/// sequentially, grouped by slice in eMBB, MTC, URLLC order.
pub fn build_cell(cfg: &ScenarioConfig, bs_id: u32) -> Result<CellState, SimError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cell_seed(cfg.rng_seed, bs_id));
    let mut ues = Vec::with_capacity(cfg.total_ues_per_bs() as usize);
    let mut next_id = 0u32;
    for slice in SliceId::ALL {
        for _ in 0..cfg.ues_per_slice_per_bs {
            let traffic = TrafficSource::for_slice(cfg, slice);
            let ul_rate = traffic.mean_rate_bps() * cfg.uplink.rate_fraction;
            let ul_arrivals = TrafficSource::poisson(ul_rate, cfg.iot_packet_bytes);
            let ul_capacity_bytes_per_tti =
                ul_rate * cfg.uplink.capacity_factor / 8.0 * (cfg.tti_ms as f64 / 1000.0);
            ues.push(UeState {
                ue_id: next_id,
                slice,
                dl_buffer_bytes: 0,
                ewma_rate_bps: 0.0,
                ul_buffer_bytes: 0,
                traffic,
                channel: ChannelState::init(&cfg.channel, &mut rng),
                ul_arrivals,
                ul_capacity_bytes_per_tti,
                ul_drain_carry: 0.0,
                acc: KpmAccum::default(),
            });
            next_id += 1;
        }
    }
    Ok(CellState {
        bs_id,
        slicing: cfg.default_slicing,
        scheduling: cfg.default_scheduling,
        cfg: cfg.clone(),
        ues,
        pending_control: None,
        rr_cursors: [0; 3],
        now_ms: 0,
        window_start_ms: 0,
        rng,
        counters: CellCounters::default(),
    })
}

fn cell_seed(rng_seed: u64, bs_id: u32) -> u64 {
    rng_seed ^ (u64::from(bs_id).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

impl CellState {
    pub fn now_ms(&self) -> u64 {
        self.now_ms
    }

    pub fn slicing(&self) -> SlicingProfile {
        self.slicing
    }

    pub fn scheduling(&self) -> SchedulingProfile {
        self.scheduling
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn ues(&self) -> &[UeState] {
        &self.ues
    }

    /// Stages new control profiles; they take effect at the next TTI
    /// boundary, never mid-TTI. Invalid profiles are rejected and the
    /// previous profiles stay in force.
    pub fn apply_control(
        &mut self,
        slicing: SlicingProfile,
        scheduling: SchedulingProfile,
    ) -> Result<(), SimError> {
        if let Err(e) = slicing.validate(self.cfg.total_prbs) {
            self.counters.rejected_controls += 1;
            return Err(e);
        }
        self.pending_control = Some((slicing, scheduling));
        Ok(())
    }

    /// Runs one TTI.
    pub fn step_tti(&mut self) {
        if let Some((sl, sc)) = self.pending_control.take() {
            self.slicing = sl;
            self.scheduling = sc;
        }
        let tti_ms = self.cfg.tti_ms;
        let tti_s = tti_ms as f64 / 1000.0;

        // Source traffic arrivals.
        for ue in &mut self.ues {
            let bytes = ue.traffic.gen_traffic(tti_ms, &mut self.rng);
            ue.dl_buffer_bytes += bytes;
            self.counters.arrived_bytes += bytes;
        }

        // Channel walks.
        let next_now = self.now_ms + tti_ms;
        for ue in &mut self.ues {
            ue.channel.advance(next_now, &mut self.rng);
        }

        // Demand accounting happens against the post-arrival buffers.
        for ue in &mut self.ues {
            let bpp = tb_size(ue.channel.mcs(), 1).expect("mcs in range");
            let needed = if ue.dl_buffer_bytes == 0 {
                0
            } else {
                (ue.dl_buffer_bytes * 8).div_ceil(bpp)
            };
            ue.acc.requested_prbs += needed.min(u64::from(self.cfg.total_prbs));
            ue.acc.mcs_sum += f64::from(ue.channel.mcs());
            ue.acc.cqi_sum += f64::from(ue.channel.cqi);
            ue.acc.ttis += 1;
        }

        // Per-slice scheduling inside the PRB masks, then TB transmission.
        for slice in SliceId::ALL {
            let mask = self.slicing.get(slice);
            let members: Vec<usize> = (0..self.ues.len())
                .filter(|&i| self.ues[i].slice == slice)
                .collect();
            let sched_view: Vec<SchedUe> = members
                .iter()
                .map(|&i| {
                    let ue = &self.ues[i];
                    SchedUe {
                        ue_id: ue.ue_id,
                        buffer_bytes: ue.dl_buffer_bytes,
                        bits_per_prb: tb_size(ue.channel.mcs(), 1).expect("mcs in range"),
                        ewma_rate_bps: ue.ewma_rate_bps,
                    }
                })
                .collect();
            let alloc = schedule_slice(
                self.scheduling.get(slice),
                &sched_view,
                mask,
                &mut self.rr_cursors[slice.index()],
                tti_s,
            );
            for &i in &members {
                let ue = &mut self.ues[i];
                let prbs = *alloc.get(&ue.ue_id).unwrap_or(&0);
                let mut served_bits_for_ewma = 0.0;
                if prbs > 0 {
                    let tb_bits = tb_size(ue.channel.mcs(), prbs).expect("args in range");
                    let drained = ue.dl_buffer_bytes.min(tb_bits / 8);
                    if drained > 0 {
                        ue.dl_buffer_bytes -= drained;
                        ue.acc.delivered_bits += drained * 8;
                        ue.acc.phy_tbs += 1;
                        ue.acc.tx_symbols += u64::from(prbs) * SYMBOLS_PER_PRB;
                        ue.acc.granted_prbs += u64::from(prbs);
                        self.counters.delivered_bytes += drained;
                        served_bits_for_ewma = (drained * 8) as f64;
                    }
                }
                ue.ewma_rate_bps = (1.0 - EWMA_ALPHA) * ue.ewma_rate_bps
                    + EWMA_ALPHA * (served_bits_for_ewma / tti_s);
            }
        }

        // Uplink side-model: independent arrivals, fixed-capacity drain,
        // Poisson decode errors.
        let err_lambda = self.cfg.uplink.error_rate_per_s * tti_s;
        for ue in &mut self.ues {
            ue.ul_buffer_bytes += ue.ul_arrivals.gen_traffic(tti_ms, &mut self.rng);
            ue.ul_drain_carry += ue.ul_capacity_bytes_per_tti;
            let can_drain = ue.ul_drain_carry.floor() as u64;
            let drained = ue.ul_buffer_bytes.min(can_drain);
            ue.ul_buffer_bytes -= drained;
            ue.ul_drain_carry -= drained as f64;
            if ue.ul_drain_carry > ue.ul_capacity_bytes_per_tti {
                // No backlog to spend banked capacity on; don't hoard it.
                ue.ul_drain_carry = ue.ul_capacity_bytes_per_tti;
            }
            ue.acc.ul_delivered_bits += drained * 8;
            if err_lambda > 0.0 {
                let dist = Poisson::new(err_lambda).expect("positive lambda");
                let n: f64 = dist.sample(&mut self.rng);
                ue.acc.ul_errors += n as u64;
            }
        }

        self.now_ms = next_now;
    }

    /// Emits one KPM record per UE for the window since the last snapshot
    /// and resets the window accumulators. Rate fields are window averages;
    /// buffer fields carry the instantaneous state.
    pub fn snapshot_kpms(&mut self) -> Vec<KpmRecord> {
        let window_ms = self.now_ms - self.window_start_ms;
        let window_s = window_ms as f64 / 1000.0;
        let mut out = Vec::with_capacity(self.ues.len());
        for ue in &mut self.ues {
            let acc = std::mem::take(&mut ue.acc);
            let ttis = acc.ttis.max(1) as f64;
            out.push(KpmRecord {
                timestamp_ms: self.now_ms,
                bs_id: self.bs_id,
                ue_id: ue.ue_id,
                slice: ue.slice,
                dl_mcs: acc.mcs_sum / ttis,
                dl_tx_symbols: acc.tx_symbols,
                dl_buffer_bytes: ue.dl_buffer_bytes,
                dl_rate_bps: if window_s > 0.0 {
                    acc.delivered_bits as f64 / window_s
                } else {
                    0.0
                },
                dl_phy_tbs: acc.phy_tbs,
                dl_cqi: acc.cqi_sum / ttis,
                ul_buffer_bytes: ue.ul_buffer_bytes,
                ul_rate_bps: if window_s > 0.0 {
                    acc.ul_delivered_bits as f64 / window_s
                } else {
                    0.0
                },
                ul_errors: acc.ul_errors,
                granted_prbs: acc.granted_prbs,
                requested_prbs: acc.requested_prbs,
            });
        }
        self.window_start_ms = self.now_ms;
        out
    }
}
