//! Per-slice MAC schedulers: round robin, waterfilling, proportional fair.
//!
//! All three allocate whole PRBs inside one slice's mask, never grant a UE
//! with an empty buffer, and stop once every backlogged UE's demand is
//! covered (leftover PRBs carry nothing, so they stay unallocated). Ties are
//! always broken by the lowest UE id to keep runs reproducible.

use std::collections::BTreeMap;

use crate::slice::SchedPolicy;

/// Scheduler view of one UE.
#[derive(Debug, Clone)]
pub struct SchedUe {
    pub ue_id: u32,
    pub buffer_bytes: u64,
    /// Transport block bits one PRB carries at the UE's current MCS.
    pub bits_per_prb: u64,
    /// Exponentially averaged served rate, bits/s (PF denominator).
    pub ewma_rate_bps: f64,
}

impl SchedUe {
    fn demand_prbs(&self) -> u64 {
        if self.buffer_bytes == 0 || self.bits_per_prb == 0 {
            return 0;
        }
        (self.buffer_bytes * 8).div_ceil(self.bits_per_prb)
    }
}

/// Floor for the PF denominator so freshly admitted UEs win immediately.
const EWMA_FLOOR_BPS: f64 = 1.0;

/// Allocates up to `prb_mask` PRBs of one slice among its UEs.
///
/// `rr_cursor` is the round-robin rotation pointer; it persists across TTIs
/// (an index into the id-sorted UE list) and is ignored by WF/PF. `tti_s`
/// converts per-TTI bits into rates for the PF metric.
pub fn schedule_slice(
    policy: SchedPolicy,
    ues: &[SchedUe],
    prb_mask: u16,
    rr_cursor: &mut usize,
    tti_s: f64,
) -> BTreeMap<u32, u16> {
    let mut alloc: BTreeMap<u32, u16> = BTreeMap::new();
    if ues.is_empty() || prb_mask == 0 {
        return alloc;
    }

    // Id-sorted order makes every policy deterministic.
    let mut order: Vec<usize> = (0..ues.len()).collect();
    order.sort_by_key(|&i| ues[i].ue_id);

    let mut remaining: Vec<u64> = ues.iter().map(SchedUe::demand_prbs).collect();
    let mut left = prb_mask;

    match policy {
        SchedPolicy::Rr => {
            let n = order.len();
            let mut cursor = *rr_cursor % n;
            while left > 0 && remaining.iter().any(|&d| d > 0) {
                let i = order[cursor];
                cursor = (cursor + 1) % n;
                if remaining[i] == 0 {
                    continue;
                }
                remaining[i] -= 1;
                *alloc.entry(ues[i].ue_id).or_insert(0) += 1;
                left -= 1;
            }
            *rr_cursor = cursor;
        }
        SchedPolicy::Wf => {
            // Best channel first, each filled up to its buffer demand.
            let mut by_quality = order.clone();
            by_quality.sort_by(|&a, &b| {
                ues[b]
                    .bits_per_prb
                    .cmp(&ues[a].bits_per_prb)
                    .then(ues[a].ue_id.cmp(&ues[b].ue_id))
            });
            for i in by_quality {
                if left == 0 {
                    break;
                }
                let grant = remaining[i].min(u64::from(left)) as u16;
                if grant > 0 {
                    remaining[i] -= u64::from(grant);
                    *alloc.entry(ues[i].ue_id).or_insert(0) += grant;
                    left -= grant;
                }
            }
        }
        SchedPolicy::Pf => {
            // PRB-by-PRB argmax of instantaneous over average rate; bits
            // granted earlier in the same TTI count toward the denominator
            // so grants spread within the TTI as well.
            let mut tti_bits: Vec<f64> = vec![0.0; ues.len()];
            while left > 0 {
                let mut best: Option<(f64, usize)> = None;
                for &i in &order {
                    if remaining[i] == 0 {
                        continue;
                    }
                    let inst = ues[i].bits_per_prb as f64 / tti_s;
                    let avg =
                        (ues[i].ewma_rate_bps + tti_bits[i] / tti_s).max(EWMA_FLOOR_BPS);
                    let metric = inst / avg;
                    let better = match best {
                        None => true,
                        Some((m, _)) => metric > m,
                    };
                    if better {
                        best = Some((metric, i));
                    }
                }
                let Some((_, i)) = best else { break };
                remaining[i] -= 1;
                tti_bits[i] += ues[i].bits_per_prb as f64;
                *alloc.entry(ues[i].ue_id).or_insert(0) += 1;
                left -= 1;
            }
        }
    }

    alloc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ue(id: u32, buffer: u64, bpp: u64, ewma: f64) -> SchedUe {
        SchedUe {
            ue_id: id,
            buffer_bytes: buffer,
            bits_per_prb: bpp,
            ewma_rate_bps: ewma,
        }
    }

    #[test]
    fn rr_splits_evenly_between_two_backlogged_ues() {
        let ues = vec![ue(0, 1 << 20, 200, 0.0), ue(1, 1 << 20, 200, 0.0)];
        let mut cursor = 0;
        let alloc = schedule_slice(SchedPolicy::Rr, &ues, 10, &mut cursor, 1e-3);
        assert_eq!(alloc[&0], 5);
        assert_eq!(alloc[&1], 5);
    }

    #[test]
    fn empty_buffers_get_nothing() {
        let ues = vec![ue(0, 0, 200, 0.0), ue(1, 0, 200, 0.0)];
        for policy in SchedPolicy::ALL {
            let mut cursor = 0;
            let alloc = schedule_slice(policy, &ues, 10, &mut cursor, 1e-3);
            assert!(alloc.is_empty());
        }
    }

    #[test]
    fn empty_ue_list_is_empty_allocation() {
        let mut cursor = 0;
        assert!(schedule_slice(SchedPolicy::Pf, &[], 10, &mut cursor, 1e-3).is_empty());
    }

    #[test]
    fn allocation_never_exceeds_mask() {
        let ues = vec![
            ue(0, 1 << 20, 100, 5_000.0),
            ue(1, 1 << 20, 300, 1_000.0),
            ue(2, 50, 300, 0.0),
        ];
        for policy in SchedPolicy::ALL {
            let mut cursor = 0;
            let alloc = schedule_slice(policy, &ues, 17, &mut cursor, 1e-3);
            let total: u32 = alloc.values().map(|&v| u32::from(v)).sum();
            assert!(total <= 17);
        }
    }

    #[test]
    fn demand_bounded_leftover_only_when_all_drained() {
        // 50-byte buffer at 300 bits/PRB needs 2 PRBs; the other 8 stay free.
        let ues = vec![ue(0, 50, 300, 0.0)];
        for policy in SchedPolicy::ALL {
            let mut cursor = 0;
            let alloc = schedule_slice(policy, &ues, 10, &mut cursor, 1e-3);
            assert_eq!(alloc[&0], 2);
        }
    }

    #[test]
    fn wf_prefers_best_channel() {
        let ues = vec![ue(0, 10_000, 100, 0.0), ue(1, 10_000, 400, 0.0)];
        let mut cursor = 0;
        let alloc = schedule_slice(SchedPolicy::Wf, &ues, 10, &mut cursor, 1e-3);
        // UE 1 demands 80_000 / 400 = 200 PRBs, far above the mask, so the
        // best channel takes everything.
        assert_eq!(alloc.get(&1), Some(&10));
        assert_eq!(alloc.get(&0), None);
    }

    #[test]
    fn pf_long_run_equal_share_on_symmetric_channels() {
        // Brute-force long-run average: symmetric channels and full buffers
        // must converge to equal PRB shares within 1%.
        let mut ewma = [0.0f64; 2];
        let mut totals = [0u64; 2];
        let tti_s = 1e-3;
        let alpha = 0.01;
        let mut cursor = 0;
        for _ in 0..10_000 {
            let ues = vec![
                ue(0, 1 << 30, 200, ewma[0]),
                ue(1, 1 << 30, 200, ewma[1]),
            ];
            let alloc = schedule_slice(SchedPolicy::Pf, &ues, 11, &mut cursor, tti_s);
            for id in 0..2u32 {
                let prbs = u64::from(*alloc.get(&id).unwrap_or(&0));
                totals[id as usize] += prbs;
                let served = prbs as f64 * 200.0 / tti_s;
                ewma[id as usize] = (1.0 - alpha) * ewma[id as usize] + alpha * served;
            }
        }
        let total = (totals[0] + totals[1]) as f64;
        let share0 = totals[0] as f64 / total;
        assert!((share0 - 0.5).abs() < 0.01, "share {share0}");
    }

    #[test]
    fn rr_rotation_spread_at_most_one() {
        // Constant backlog: over any horizon, per-UE grant counts differ by
        // at most one full rotation's worth.
        let mut cursor = 0;
        let mut totals = [0u64; 3];
        for _ in 0..997 {
            let ues = vec![
                ue(0, 1 << 30, 200, 0.0),
                ue(1, 1 << 30, 200, 0.0),
                ue(2, 1 << 30, 200, 0.0),
            ];
            let alloc = schedule_slice(SchedPolicy::Rr, &ues, 7, &mut cursor, 1e-3);
            for id in 0..3u32 {
                totals[id as usize] += u64::from(*alloc.get(&id).unwrap_or(&0));
            }
        }
        let max = *totals.iter().max().unwrap();
        let min = *totals.iter().min().unwrap();
        assert!(max - min <= 1, "totals {totals:?}");
    }
}
