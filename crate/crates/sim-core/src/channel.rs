//! Channel quality model and transport block sizing.
//!
//! The TB size abstraction replaces real LTE TBS tables with a fixed
//! per-MCS bits-per-PRB ladder: `tb_size(mcs, n) = n * BITS_PER_PRB[mcs]`.
//! The ladder is a spectral-efficiency curve (bits/symbol) times the 120
//! data symbol slots one PRB carries per TTI, rounded to integers, and is
//! strictly part of the configuration contract (see the config reference
//! in the README).

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::config::{ChannelConfig, MAX_PRBS};
use crate::SimError;

/// Data symbol slots per PRB per TTI.
pub const SYMBOLS_PER_PRB: u64 = 120;

pub const MIN_CQI: u8 = 1;
pub const MAX_CQI: u8 = 15;
pub const MAX_MCS: u8 = 28;

/// Transport block bits carried by one PRB in one TTI, per MCS 0..=28.
/// Monotonically non-decreasing in the MCS index.
pub const BITS_PER_PRB: [u64; 29] = [
    18, 23, 28, 37, 45, 53, 71, 89, 105, 123, 141, 159, 177, 203, 230, 259, 289, 308, 328, 364,
    399, 433, 468, 506, 543, 578, 614, 640, 667,
];

/// Transport block size in bits for `n_prbs` PRBs at the given MCS.
/// Exactly linear in the PRB count by construction.
pub fn tb_size(mcs: u8, n_prbs: u16) -> Result<u64, SimError> {
    if mcs > MAX_MCS {
        return Err(SimError::Argument(format!(
            "mcs {mcs} out of range 0..={MAX_MCS}"
        )));
    }
    if n_prbs > MAX_PRBS {
        return Err(SimError::Argument(format!(
            "n_prbs {n_prbs} out of range 0..={MAX_PRBS}"
        )));
    }
    Ok(u64::from(n_prbs) * BITS_PER_PRB[mcs as usize])
}

/// Affine CQI-to-MCS map clipped to the MCS range: `mcs = 2 * (cqi - 1)`.
pub fn cqi_to_mcs(cqi: u8) -> u8 {
    let cqi = cqi.clamp(MIN_CQI, MAX_CQI);
    (2 * (cqi - 1)).min(MAX_MCS)
}

/// Per-UE channel state: a bounded +/-1 random walk around a per-UE mean.
#[derive(Debug, Clone)]
pub struct ChannelState {
    pub cqi: u8,
    lo: u8,
    hi: u8,
    step_period_ms: u64,
    next_step_ms: u64,
}

impl ChannelState {
    /// Draws the per-UE mean CQI from the configured range and clips the
    /// walk window to the global 1..=15 bounds.
    pub fn init(cfg: &ChannelConfig, rng: &mut ChaCha8Rng) -> Self {
        let mean = if cfg.cqi_mean_max > cfg.cqi_mean_min {
            rng.random_range(cfg.cqi_mean_min..=cfg.cqi_mean_max)
        } else {
            cfg.cqi_mean_min
        };
        let mean = mean.round().clamp(f64::from(MIN_CQI), f64::from(MAX_CQI)) as u8;
        let lo = mean.saturating_sub(cfg.walk_halfwidth).max(MIN_CQI);
        let hi = (mean + cfg.walk_halfwidth).min(MAX_CQI);
        Self {
            cqi: mean,
            lo,
            hi,
            step_period_ms: cfg.step_period_ms,
            next_step_ms: cfg.step_period_ms,
        }
    }

    /// Advances the walk if a step boundary has been reached.
    pub fn advance(&mut self, now_ms: u64, rng: &mut ChaCha8Rng) {
        while now_ms >= self.next_step_ms {
            self.next_step_ms += self.step_period_ms;
            if self.lo == self.hi {
                continue;
            }
            let up: bool = rng.random();
            let next = if up {
                self.cqi.saturating_add(1)
            } else {
                self.cqi.saturating_sub(1)
            };
            // Reflect at the window edges.
            self.cqi = if next > self.hi {
                self.hi - 1
            } else if next < self.lo {
                self.lo + 1
            } else {
                next
            };
        }
    }

    pub fn mcs(&self) -> u8 {
        cqi_to_mcs(self.cqi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn tb_size_zero_prbs_is_zero() {
        for m in 0..=MAX_MCS {
            assert_eq!(tb_size(m, 0).unwrap(), 0);
        }
    }

    #[test]
    fn tb_size_monotone_in_mcs() {
        for k in [1u16, 5, 50, 110] {
            for m in 1..=MAX_MCS {
                assert!(tb_size(m, k).unwrap() >= tb_size(m - 1, k).unwrap());
            }
            assert!(tb_size(MAX_MCS, k).unwrap() >= tb_size(0, k).unwrap());
        }
    }

    #[test]
    fn tb_size_linear_in_prbs() {
        // Table-lookup oracle: n PRBs carry exactly n times one PRB's bits.
        for m in 0..=MAX_MCS {
            for k in 0..=MAX_PRBS {
                assert_eq!(
                    tb_size(m, k).unwrap(),
                    u64::from(k) * tb_size(m, 1).unwrap()
                );
            }
        }
        assert_eq!(tb_size(10, 5).unwrap(), 5 * tb_size(10, 1).unwrap());
    }

    #[test]
    fn tb_size_rejects_out_of_range() {
        assert!(tb_size(29, 1).is_err());
        assert!(tb_size(0, MAX_PRBS + 1).is_err());
    }

    #[test]
    fn cqi_mcs_map_covers_full_range() {
        assert_eq!(cqi_to_mcs(1), 0);
        assert_eq!(cqi_to_mcs(15), 28);
        for c in 1..15u8 {
            assert!(cqi_to_mcs(c + 1) >= cqi_to_mcs(c));
        }
    }

    #[test]
    fn walk_stays_in_window() {
        let cfg = ChannelConfig {
            cqi_mean_min: 8.0,
            cqi_mean_max: 8.0,
            walk_halfwidth: 3,
            step_period_ms: 10,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut ch = ChannelState::init(&cfg, &mut rng);
        for t in 1..50_000u64 {
            ch.advance(t, &mut rng);
            assert!((5..=11).contains(&ch.cqi), "cqi {} out of window", ch.cqi);
        }
    }

    #[test]
    fn frozen_walk_when_halfwidth_zero() {
        let cfg = ChannelConfig {
            cqi_mean_min: 15.0,
            cqi_mean_max: 15.0,
            walk_halfwidth: 0,
            step_period_ms: 10,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut ch = ChannelState::init(&cfg, &mut rng);
        for t in 1..1000u64 {
            ch.advance(t, &mut rng);
            assert_eq!(ch.cqi, 15);
        }
    }
}
