//! Temporary diagnostic - removed before final.
use data_factory::{correlation_matrix, Dataset, RowContext, RowFilter};
use sim_core::{build_cell, ScenarioConfig, SchedPolicy, SchedulingProfile, SliceId, SlicingProfile};

#[test]
#[ignore]
fn probe_seed_sweep() {
    for seed in 0..10u64 {
        let cfg = ScenarioConfig { rng_seed: seed, ..Default::default() };
        let mut cell = build_cell(&cfg, 0).unwrap();
        let mut ds = Dataset::new();
        let ctx = RowContext {
            slicing: SlicingProfile::new(36, 3, 11),
            scheduling: SchedulingProfile::uniform(SchedPolicy::Rr),
        };
        for _ in 0..1200 {
            for _ in 0..250 { cell.step_tti(); }
            let recs = cell.snapshot_kpms();
            ds.append_records(&recs, &ctx).unwrap();
        }
        let embb = RowFilter::slice(SliceId::Embb);
        let urllc = RowFilter::slice(SliceId::Urllc);
        let metrics = ["dl_phy_tbs", "dl_tx_symbols", "dl_mcs", "dl_buffer_bytes"];
        let re = correlation_matrix(&ds, &metrics, &embb).unwrap();
        let ru = correlation_matrix(&ds, &metrics, &urllc).unwrap();
        let ts = re.get("dl_phy_tbs", "dl_tx_symbols").unwrap().value().unwrap();
        let mb_e = re.get("dl_mcs", "dl_buffer_bytes").unwrap().value().unwrap();
        let mb_u = ru.get("dl_mcs", "dl_buffer_bytes").unwrap().value().unwrap_or(0.0);
        println!("seed {seed}: tbs~sym {ts:.4}  embb mcs~buf {mb_e:.4}  urllc {mb_u:.4}  ok={}",
            ts > 0.9 && mb_e < 0.0 && mb_u.abs() < mb_e.abs());
    }
}
