//! Observation assembly: per-slice sliding windows over reporting
//! intervals, normalized to [0, 1] by offered-load reference scales.

use std::collections::VecDeque;

use ml_kit::{Autoencoder, Observation, N_METRICS, T_WINDOW};
use ndarray::Array1;
use sim_core::{ScenarioConfig, SliceId};

use crate::reward::{offered_bps_per_ue, WindowAggregate};

/// Which three metrics populate an observation row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObsMetrics {
    /// Joint controller input: rate, buffer, PHY TBs.
    RateBufferTbs,
    /// Per-slice scheduler input: rate, buffer, PRB ratio.
    RateBufferPrbRatio,
}

/// Per-slice normalization scales.
#[derive(Debug, Clone, Copy)]
pub struct NormRefs {
    pub rate_bps: [f64; 3],
    pub buffer_bytes: [f64; 3],
    pub tbs: [f64; 3],
}

impl NormRefs {
    /// Scales from the scenario's offered load: rate at the slice's offered
    /// bits/s, buffer and TB counts at one reporting window's worth.
    pub fn from_scenario(cfg: &ScenarioConfig) -> Self {
        let ues = f64::from(cfg.ues_per_slice_per_bs);
        let window_s = cfg.reporting_period_ms as f64 / 1000.0;
        let mut rate = [0.0; 3];
        let mut buffer = [0.0; 3];
        let mut tbs = [0.0; 3];
        for slice in SliceId::ALL {
            let bps = offered_bps_per_ue(cfg, slice) * ues;
            rate[slice.index()] = bps;
            buffer[slice.index()] = bps / 8.0 * window_s;
            // TB counts saturate at one block per UE per TTI.
            tbs[slice.index()] = ues * cfg.window_ttis() as f64;
        }
        Self {
            rate_bps: rate,
            buffer_bytes: buffer,
            tbs,
        }
    }
}

/// Keeps the last `T_WINDOW` aggregates per slice as normalized rows.
#[derive(Debug, Clone)]
pub struct ObservationAssembler {
    metrics: ObsMetrics,
    refs: NormRefs,
    history: [VecDeque<[f64; N_METRICS]>; 3],
    windows_seen: usize,
}

impl ObservationAssembler {
    pub fn new(metrics: ObsMetrics, refs: NormRefs) -> Self {
        Self {
            metrics,
            refs,
            history: Default::default(),
            windows_seen: 0,
        }
    }

    pub fn metrics(&self) -> ObsMetrics {
        self.metrics
    }

    pub fn windows_seen(&self) -> usize {
        self.windows_seen
    }

    pub fn clear(&mut self) {
        for h in &mut self.history {
            h.clear();
        }
        self.windows_seen = 0;
    }

    /// Ingests one reporting window.
    pub fn push(&mut self, agg: &WindowAggregate) {
        for slice in SliceId::ALL {
            let i = slice.index();
            let w = agg.slice(slice);
            let third = match self.metrics {
                ObsMetrics::RateBufferTbs => norm(w.dl_phy_tbs, self.refs.tbs[i]),
                ObsMetrics::RateBufferPrbRatio => w.prb_ratio(),
            };
            let row = [
                norm(w.dl_rate_bps, self.refs.rate_bps[i]),
                norm(w.dl_buffer_bytes, self.refs.buffer_bytes[i]),
                third,
            ];
            let h = &mut self.history[i];
            if h.len() == T_WINDOW {
                h.pop_front();
            }
            h.push_back(row);
        }
        self.windows_seen += 1;
    }

    /// The current window stack for one slice; missing leading intervals
    /// are zero rows, the newest interval is the last row.
    pub fn observation(&self, slice: SliceId) -> Observation {
        let h = &self.history[slice.index()];
        let rows: Vec<[f64; N_METRICS]> = h.iter().copied().collect();
        Observation::from_rows(&rows)
    }
}

fn norm(value: f64, reference: f64) -> f64 {
    if reference <= 0.0 {
        return 0.0;
    }
    (value / reference).clamp(0.0, 1.0)
}

/// Flattens the three per-slice windows into the joint agent's input,
/// either through the shared encoder (3 latents, 9 dims) or raw (90 dims).
pub fn joint_state(
    assembler: &ObservationAssembler,
    autoencoder: Option<&Autoencoder>,
) -> Array1<f64> {
    let mut parts: Vec<f64> = Vec::new();
    for slice in SliceId::ALL {
        let obs = assembler.observation(slice);
        match autoencoder {
            Some(ae) => parts.extend(ae.encode(&obs).0.iter()),
            None => parts.extend(obs.flatten().iter()),
        }
    }
    Array1::from(parts)
}

/// One slice's agent input for the scheduling xApp.
pub fn slice_state(
    assembler: &ObservationAssembler,
    slice: SliceId,
    autoencoder: Option<&Autoencoder>,
) -> Array1<f64> {
    let obs = assembler.observation(slice);
    match autoencoder {
        Some(ae) => ae.encode(&obs).0,
        None => obs.flatten(),
    }
}

/// Input width of the joint agent for a given featurization.
pub fn joint_state_dim(with_autoencoder: bool) -> usize {
    if with_autoencoder {
        3 * ml_kit::LATENT_DIM
    } else {
        3 * ml_kit::OBS_DIM
    }
}

pub fn slice_state_dim(with_autoencoder: bool) -> usize {
    if with_autoencoder {
        ml_kit::LATENT_DIM
    } else {
        ml_kit::OBS_DIM
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use sim_core::KpmRecord;

    fn record(slice: SliceId, ue: u32, rate: f64, buf: u64, tbs: u64) -> KpmRecord {
        KpmRecord {
            timestamp_ms: 250,
            bs_id: 0,
            ue_id: ue,
            slice,
            dl_mcs: 14.0,
            dl_tx_symbols: tbs * 120,
            dl_buffer_bytes: buf,
            dl_rate_bps: rate,
            dl_phy_tbs: tbs,
            dl_cqi: 8.0,
            ul_buffer_bytes: 0,
            ul_rate_bps: 0.0,
            ul_errors: 0,
            granted_prbs: 10,
            requested_prbs: 20,
        }
    }

    fn assembler() -> ObservationAssembler {
        ObservationAssembler::new(
            ObsMetrics::RateBufferTbs,
            NormRefs::from_scenario(&ScenarioConfig::default()),
        )
    }

    #[test]
    fn aggregation_matches_brute_force_per_ue_sums() {
        let records: Vec<KpmRecord> = (0..6)
            .map(|i| {
                record(
                    SliceId::ALL[(i % 3) as usize],
                    i,
                    1e6 + i as f64,
                    100 + i as u64,
                    10 + i as u64,
                )
            })
            .collect();
        let agg = crate::reward::aggregate(&records);
        for slice in SliceId::ALL {
            let rate: f64 = records
                .iter()
                .filter(|r| r.slice == slice)
                .map(|r| r.dl_rate_bps)
                .sum();
            let buf: f64 = records
                .iter()
                .filter(|r| r.slice == slice)
                .map(|r| r.dl_buffer_bytes as f64)
                .sum();
            assert_eq!(agg.slice(slice).dl_rate_bps, rate);
            assert_eq!(agg.slice(slice).dl_buffer_bytes, buf);
        }
    }

    #[test]
    fn identical_windows_give_identical_rows() {
        let mut asm = assembler();
        let records = vec![record(SliceId::Embb, 0, 4e6, 1000, 50)];
        let agg = crate::reward::aggregate(&records);
        for _ in 0..10 {
            asm.push(&agg);
        }
        let obs = asm.observation(SliceId::Embb);
        let first = obs.window.row(0).to_owned();
        for r in 1..T_WINDOW {
            assert_eq!(obs.window.row(r), first);
        }
        assert!(obs.is_normalized());
    }

    #[test]
    fn three_windows_fill_tail_rows_only() {
        let mut asm = assembler();
        let records = vec![record(SliceId::Embb, 0, 4e6, 1000, 50)];
        let agg = crate::reward::aggregate(&records);
        for _ in 0..3 {
            asm.push(&agg);
        }
        let obs = asm.observation(SliceId::Embb);
        for r in 0..7 {
            assert!(obs.window.row(r).iter().all(|&v| v == 0.0), "row {r}");
        }
        for r in 7..10 {
            assert!(obs.window.row(r).iter().any(|&v| v > 0.0), "row {r}");
        }
    }

    #[test]
    fn values_clamp_to_unit_interval() {
        let mut asm = assembler();
        // Rates far above the reference scale.
        let records = vec![record(SliceId::Embb, 0, 1e9, u64::MAX / 2, 100_000)];
        asm.push(&crate::reward::aggregate(&records));
        let obs = asm.observation(SliceId::Embb);
        assert!(obs.is_normalized());
        assert_eq!(obs.window[[9, 0]], 1.0);
    }

    #[test]
    fn state_dims_match_featurization() {
        let asm = assembler();
        assert_eq!(joint_state(&asm, None).len(), 90);
        let ae = Autoencoder::new(0);
        assert_eq!(joint_state(&asm, Some(&ae)).len(), 9);
        assert_eq!(slice_state(&asm, SliceId::Mtc, Some(&ae)).len(), 3);
    }
}
