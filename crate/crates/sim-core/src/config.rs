//! Scenario configuration: topology, traffic, channel and reporting knobs.
//!
//! The defaults reproduce the reference scenario: 50-PRB carriers, three
//! slices with two UEs each, slice-based source traffic (4 Mbit/s constant
//! bitrate for eMBB, 44.6 kbit/s and 89.3 kbit/s Poisson for MTC and URLLC)
//! and 250 ms KPM reporting.

use serde::{Deserialize, Serialize};

use crate::slice::{SchedPolicy, SchedulingProfile, SlicingProfile};
use crate::SimError;

/// Hard upper bound on carrier width accepted by the TB size table.
pub const MAX_PRBS: u16 = 110;

/// Source traffic shape, per Table-style scenario definitions: slice-based
/// assigns each slice its own profile, uniform gives every UE the same
/// constant bitrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrafficProfile {
    SliceBased,
    Uniform,
}

/// Per-UE source rates in bits/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrafficRates {
    pub embb_bps: f64,
    pub mtc_bps: f64,
    pub urllc_bps: f64,
    pub uniform_bps: f64,
}

impl Default for TrafficRates {
    fn default() -> Self {
        Self {
            embb_bps: 4_000_000.0,
            mtc_bps: 44_600.0,
            urllc_bps: 89_300.0,
            uniform_bps: 1_500_000.0,
        }
    }
}

/// Parametric channel model: each UE draws a mean CQI for the run, then the
/// instantaneous CQI performs a +/-1 random walk every `step_period_ms`,
/// reflecting at the per-UE window `[mean - walk_halfwidth, mean + walk_halfwidth]`
/// clipped to the global CQI range 1..=15.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChannelConfig {
    pub cqi_mean_min: f64,
    pub cqi_mean_max: f64,
    pub walk_halfwidth: u8,
    pub step_period_ms: u64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            cqi_mean_min: 9.0,
            cqi_mean_max: 12.0,
            walk_halfwidth: 3,
            step_period_ms: 10,
        }
    }
}

/// Statistical uplink side-model. Uplink KPMs are generated independently of
/// the downlink channel; they populate the uplink columns of the KPM record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UplinkConfig {
    /// Mean uplink offered load as a fraction of the UE's downlink source rate.
    pub rate_fraction: f64,
    /// Mean uplink decode errors per second (Poisson).
    pub error_rate_per_s: f64,
    /// Uplink service capacity as a multiple of the mean uplink offered load.
    pub capacity_factor: f64,
}

impl Default for UplinkConfig {
    fn default() -> Self {
        Self {
            rate_fraction: 0.1,
            error_rate_per_s: 2.0,
            capacity_factor: 2.0,
        }
    }
}

/// Full scenario description. Deserializes from the TOML scenario file; every
/// field has a default so partial files are accepted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub n_bs: u32,
    pub ues_per_slice_per_bs: u32,
    pub total_prbs: u16,
    /// Scheduler time step. The emulator always steps one TTI at a time.
    pub tti_ms: u64,
    pub traffic_profile: TrafficProfile,
    pub rates: TrafficRates,
    /// KPM reporting period on E2, in ms. Must be a multiple of the TTI.
    pub reporting_period_ms: u64,
    pub rng_seed: u64,
    pub channel: ChannelConfig,
    pub uplink: UplinkConfig,
    /// Profiles a cell starts with before any control is applied.
    pub default_slicing: SlicingProfile,
    pub default_scheduling: SchedulingProfile,
    /// Payload unit for the eMBB constant-bitrate source (slice-based
    /// traffic delivers video-style chunks).
    pub cbr_packet_bytes: u32,
    /// Payload unit for Poisson sources (MTC/URLLC).
    pub iot_packet_bytes: u32,
    /// Payload unit for the uniform traffic profile.
    pub uniform_packet_bytes: u32,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_bs: 1,
            ues_per_slice_per_bs: 2,
            total_prbs: 50,
            tti_ms: 1,
            traffic_profile: TrafficProfile::SliceBased,
            rates: TrafficRates::default(),
            reporting_period_ms: 250,
            rng_seed: 1,
            channel: ChannelConfig::default(),
            uplink: UplinkConfig::default(),
            default_slicing: SlicingProfile::new(36, 3, 11),
            default_scheduling: SchedulingProfile::uniform(SchedPolicy::Rr),
            cbr_packet_bytes: 6250,
            iot_packet_bytes: 50,
            uniform_packet_bytes: 1250,
        }
    }
}

impl ScenarioConfig {
    /// Validates every invariant; the error names the offending field.
    pub fn validate(&self) -> Result<(), SimError> {
        if self.n_bs < 1 {
            return Err(SimError::config("n_bs", "must be at least 1"));
        }
        if self.ues_per_slice_per_bs == 0 {
            return Err(SimError::config("ues_per_slice_per_bs", "no UEs per slice"));
        }
        if self.total_prbs < 3 {
            return Err(SimError::config(
                "total_prbs",
                "need at least one PRB per slice",
            ));
        }
        if self.total_prbs > MAX_PRBS {
            return Err(SimError::config(
                "total_prbs",
                "exceeds the maximum supported carrier width",
            ));
        }
        if self.tti_ms == 0 {
            return Err(SimError::config("tti_ms", "must be positive"));
        }
        if self.reporting_period_ms == 0 || self.reporting_period_ms % self.tti_ms != 0 {
            return Err(SimError::config(
                "reporting_period_ms",
                "must be a positive multiple of the TTI",
            ));
        }
        let rates = [
            ("rates.embb_bps", self.rates.embb_bps),
            ("rates.mtc_bps", self.rates.mtc_bps),
            ("rates.urllc_bps", self.rates.urllc_bps),
            ("rates.uniform_bps", self.rates.uniform_bps),
        ];
        for (field, r) in rates {
            if !(r > 0.0) || !r.is_finite() {
                return Err(SimError::config(field, "rate must be positive"));
            }
        }
        if !(1.0..=15.0).contains(&self.channel.cqi_mean_min)
            || !(1.0..=15.0).contains(&self.channel.cqi_mean_max)
            || self.channel.cqi_mean_min > self.channel.cqi_mean_max
        {
            return Err(SimError::config(
                "channel.cqi_mean_min/cqi_mean_max",
                "means must satisfy 1 <= min <= max <= 15",
            ));
        }
        if self.channel.step_period_ms == 0 {
            return Err(SimError::config("channel.step_period_ms", "must be positive"));
        }
        if self.cbr_packet_bytes == 0 {
            return Err(SimError::config("cbr_packet_bytes", "must be positive"));
        }
        if self.iot_packet_bytes == 0 {
            return Err(SimError::config("iot_packet_bytes", "must be positive"));
        }
        if self.uniform_packet_bytes == 0 {
            return Err(SimError::config("uniform_packet_bytes", "must be positive"));
        }
        if !(self.uplink.rate_fraction > 0.0) {
            return Err(SimError::config("uplink.rate_fraction", "must be positive"));
        }
        if !(self.uplink.capacity_factor > 0.0) {
            return Err(SimError::config("uplink.capacity_factor", "must be positive"));
        }
        if self.uplink.error_rate_per_s < 0.0 {
            return Err(SimError::config(
                "uplink.error_rate_per_s",
                "must be non-negative",
            ));
        }
        self.default_slicing
            .validate(self.total_prbs)
            .map_err(|e| SimError::config("default_slicing", &e.to_string()))?;
        Ok(())
    }

    /// Parses and validates a TOML scenario file body.
    pub fn from_toml_str(s: &str) -> Result<Self, SimError> {
        let cfg: ScenarioConfig =
            toml::from_str(s).map_err(|e| SimError::config("scenario file", &e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("scenario config serializes")
    }

    pub fn total_ues_per_bs(&self) -> u32 {
        self.ues_per_slice_per_bs * 3
    }

    pub fn window_ttis(&self) -> u64 {
        self.reporting_period_ms / self.tti_ms
    }
}
