//! Downlink source traffic models.
//!
//! Constant-bitrate sources accumulate bytes at the configured rate and
//! release whole packets; Poisson sources draw a packet count per step.
//! Both enqueue multiples of their packet size, so buffers fill and drain
//! in bursts the way packetized traffic does.

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::config::{ScenarioConfig, TrafficProfile};
use crate::slice::SliceId;

#[derive(Debug, Clone)]
enum SourceKind {
    Cbr { bytes_per_s: f64, carry_bytes: f64 },
    Poisson { pkts_per_s: f64 },
}

/// Per-UE downlink traffic source.
#[derive(Debug, Clone)]
pub struct TrafficSource {
    kind: SourceKind,
    packet_bytes: u64,
}

impl TrafficSource {
    /// Builds the source for one UE according to the scenario traffic profile:
    /// slice-based gives eMBB constant bitrate and MTC/URLLC Poisson arrivals;
    /// uniform gives every slice the same constant bitrate.
    pub fn for_slice(cfg: &ScenarioConfig, slice: SliceId) -> Self {
        match (cfg.traffic_profile, slice) {
            (TrafficProfile::Uniform, _) => {
                Self::cbr(cfg.rates.uniform_bps, cfg.uniform_packet_bytes)
            }
            (TrafficProfile::SliceBased, SliceId::Embb) => {
                Self::cbr(cfg.rates.embb_bps, cfg.cbr_packet_bytes)
            }
            (TrafficProfile::SliceBased, SliceId::Mtc) => {
                Self::poisson(cfg.rates.mtc_bps, cfg.iot_packet_bytes)
            }
            (TrafficProfile::SliceBased, SliceId::Urllc) => {
                Self::poisson(cfg.rates.urllc_bps, cfg.iot_packet_bytes)
            }
        }
    }

    pub fn cbr(rate_bps: f64, packet_bytes: u32) -> Self {
        Self {
            kind: SourceKind::Cbr {
                bytes_per_s: rate_bps / 8.0,
                carry_bytes: 0.0,
            },
            packet_bytes: u64::from(packet_bytes),
        }
    }

    pub fn poisson(rate_bps: f64, packet_bytes: u32) -> Self {
        Self {
            kind: SourceKind::Poisson {
                pkts_per_s: rate_bps / 8.0 / f64::from(packet_bytes),
            },
            packet_bytes: u64::from(packet_bytes),
        }
    }

    /// Bytes enqueued over a step of `dt_ms`.
    pub fn gen_traffic(&mut self, dt_ms: u64, rng: &mut ChaCha8Rng) -> u64 {
        if dt_ms == 0 {
            return 0;
        }
        let dt_s = dt_ms as f64 / 1000.0;
        match &mut self.kind {
            SourceKind::Cbr {
                bytes_per_s,
                carry_bytes,
            } => {
                *carry_bytes += *bytes_per_s * dt_s;
                let pkts = (*carry_bytes / self.packet_bytes as f64).floor();
                let bytes = pkts as u64 * self.packet_bytes;
                *carry_bytes -= bytes as f64;
                bytes
            }
            SourceKind::Poisson { pkts_per_s } => {
                let lambda = *pkts_per_s * dt_s;
                if lambda <= 0.0 {
                    return 0;
                }
                let dist = Poisson::new(lambda).expect("positive lambda");
                let n: f64 = dist.sample(rng);
                n as u64 * self.packet_bytes
            }
        }
    }

    pub fn mean_rate_bps(&self) -> f64 {
        match &self.kind {
            SourceKind::Cbr { bytes_per_s, .. } => bytes_per_s * 8.0,
            SourceKind::Poisson { pkts_per_s } => pkts_per_s * self.packet_bytes as f64 * 8.0,
        }
    }

    pub fn packet_bytes(&self) -> u64 {
        self.packet_bytes
    }
}
