//! Long-horizon invariant checks over randomized control sequences: PRB
//! partition, demand-bounded work conservation and byte conservation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sim_core::channel::BITS_PER_PRB;
use sim_core::{
    build_cell, schedule_slice, ScenarioConfig, SchedPolicy, SchedUe, SchedulingProfile, SliceId,
    SlicingProfile,
};

fn random_slicing(rng: &mut ChaCha8Rng, total: u16) -> SlicingProfile {
    // Two cut points over the carrier, each slice at least one PRB.
    let a = rng.random_range(1..total - 1);
    let b = rng.random_range(a + 1..total);
    SlicingProfile::new(a, b - a, total - b)
}

fn random_scheduling(rng: &mut ChaCha8Rng) -> SchedulingProfile {
    let pick = |r: &mut ChaCha8Rng| SchedPolicy::ALL[r.random_range(0..3)];
    SchedulingProfile::new(pick(rng), pick(rng), pick(rng))
}

#[test]
fn prb_partition_holds_under_randomized_control() {
    let cfg = ScenarioConfig::default();
    let mut cell = build_cell(&cfg, 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    for tti in 0..20_000u64 {
        if tti % 500 == 0 {
            cell.apply_control(random_slicing(&mut rng, 50), random_scheduling(&mut rng))
                .unwrap();
        }
        cell.step_tti();
        if tti % 250 == 249 {
            let recs = cell.snapshot_kpms();
            // Per-window grants can never exceed the carrier's PRB budget.
            let granted: u64 = recs.iter().map(|r| r.granted_prbs).sum();
            assert!(granted <= 50 * 250, "granted {granted} over window");
            for r in &recs {
                assert!(r.granted_prbs <= 50 * 250);
                assert!(r.requested_prbs <= 50 * 250);
            }
        }
    }
}

#[test]
fn scheduler_fuzz_partition_and_work_conservation() {
    // Direct scheduler fuzz: random UE sets, every policy, 30k rounds.
    // Checks (a) the allocation never exceeds the mask, (b) UEs with empty
    // buffers get nothing, and (c) PRBs are left over only when every UE's
    // demand is fully covered.
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut cursor = 0usize;
    for _ in 0..30_000 {
        let n = rng.random_range(1..6usize);
        let ues: Vec<SchedUe> = (0..n)
            .map(|i| SchedUe {
                ue_id: i as u32,
                buffer_bytes: if rng.random_bool(0.3) {
                    0
                } else {
                    rng.random_range(1..100_000)
                },
                bits_per_prb: BITS_PER_PRB[rng.random_range(0..29)],
                ewma_rate_bps: rng.random_range(0.0..1e7),
            })
            .collect();
        let mask = rng.random_range(0..30u16);
        let policy = SchedPolicy::ALL[rng.random_range(0..3)];
        let alloc = schedule_slice(policy, &ues, mask, &mut cursor, 1e-3);

        let total: u32 = alloc.values().map(|&v| u32::from(v)).sum();
        assert!(total <= u32::from(mask));
        for ue in &ues {
            let granted = u64::from(*alloc.get(&ue.ue_id).unwrap_or(&0));
            if ue.buffer_bytes == 0 {
                assert_eq!(granted, 0, "empty buffer granted PRBs");
            }
        }
        if total < u32::from(mask) {
            for ue in &ues {
                let granted = u64::from(*alloc.get(&ue.ue_id).unwrap_or(&0));
                let covered = granted * ue.bits_per_prb >= ue.buffer_bytes * 8;
                assert!(
                    covered,
                    "leftover PRBs while UE {} still has unserved demand",
                    ue.ue_id
                );
            }
        }
    }
}

#[test]
fn arrivals_equal_deliveries_plus_backlog_at_all_times() {
    let cfg = ScenarioConfig::default();
    let mut cell = build_cell(&cfg, 1).unwrap();
    for tti in 0..5_000u64 {
        cell.step_tti();
        if tti % 50 == 0 {
            let backlog: u64 = cell.ues().iter().map(|u| u.dl_buffer_bytes).sum();
            assert_eq!(
                cell.counters.arrived_bytes,
                cell.counters.delivered_bytes + backlog
            );
            assert!(cell.counters.delivered_bytes <= cell.counters.arrived_bytes);
        }
    }
}
