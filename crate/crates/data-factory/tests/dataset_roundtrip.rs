//! Dataset round-trip and report behavior on generated and synthetic data.

use data_factory::{
    correlation_matrix, feature_report, CorrValue, Dataset, DatasetWriter, RowContext, RowFilter,
};
use sim_core::{
    build_cell, KpmRecord, ScenarioConfig, SchedPolicy, SchedulingProfile, SliceId, SlicingProfile,
};

fn default_ctx() -> RowContext {
    RowContext {
        slicing: SlicingProfile::new(36, 3, 11),
        scheduling: SchedulingProfile::uniform(SchedPolicy::Rr),
    }
}

fn collect_windows(windows: usize, seed: u64) -> Dataset {
    let cfg = ScenarioConfig {
        rng_seed: seed,
        ..Default::default()
    };
    let mut cell = build_cell(&cfg, 0).unwrap();
    let mut ds = Dataset::new();
    let ctx = default_ctx();
    for _ in 0..windows {
        for _ in 0..250 {
            cell.step_tti();
        }
        let recs = cell.snapshot_kpms();
        ds.append_records(&recs, &ctx).unwrap();
    }
    ds
}

#[test]
fn append_grows_by_record_count_and_context_sticks() {
    let ds = collect_windows(1, 5);
    assert_eq!(ds.len(), 6);
    for row in ds.rows() {
        assert_eq!(row.ctx, default_ctx());
    }
}

#[test]
fn csv_roundtrip_is_lossless() {
    let ds = collect_windows(12, 9);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("kpm.csv");
    ds.write_csv(&path).unwrap();
    let back = Dataset::read_csv(&path).unwrap();
    assert_eq!(ds.len(), back.len());
    for (a, b) in ds.rows().iter().zip(back.rows()) {
        assert_eq!(a, b);
    }
}

#[test]
fn streaming_writer_matches_batch_writer() {
    let ds = collect_windows(4, 11);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("stream.csv");
    let mut w = DatasetWriter::create(&path, 7).unwrap();
    for row in ds.rows() {
        w.write_row(&row.record, &row.ctx).unwrap();
    }
    w.finish().unwrap();
    let back = Dataset::read_csv(&path).unwrap();
    assert_eq!(back.rows(), ds.rows());
}

#[test]
fn wrong_header_is_schema_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "a,b,c\n1,2,3\n").unwrap();
    let err = Dataset::read_csv(&path).unwrap_err();
    assert!(matches!(err, data_factory::DataError::SchemaMismatch { .. }));
}

#[test]
fn matrix_has_unit_diagonal_and_exact_symmetry() {
    let ds = collect_windows(40, 21);
    let metrics = sim_core::TRACKED_METRICS;
    let report = correlation_matrix(&ds, &metrics, &RowFilter::slice(SliceId::Embb)).unwrap();
    for i in 0..metrics.len() {
        assert_eq!(report.matrix[i][i], CorrValue::Defined(1.0));
        for j in 0..metrics.len() {
            match (report.matrix[i][j], report.matrix[j][i]) {
                (CorrValue::Defined(a), CorrValue::Defined(b)) => {
                    assert!((a - b).abs() < 1e-12);
                    assert!((-1.0..=1.0).contains(&a));
                }
                (CorrValue::Undefined, CorrValue::Undefined) => {}
                _ => panic!("asymmetric definedness at ({i},{j})"),
            }
            assert_eq!(report.counts[i][j], report.counts[j][i]);
        }
    }
}

#[test]
fn empty_filter_is_an_error() {
    let ds = collect_windows(2, 3);
    let filter = RowFilter {
        bs_id: Some(999),
        ..Default::default()
    };
    let err = correlation_matrix(&ds, &["dl_mcs", "dl_cqi"], &filter).unwrap_err();
    assert!(matches!(err, data_factory::DataError::EmptyFilter));
}

/// Builds a dataset with a duplicated metric by copying a column through a
/// doctored record stream.
#[test]
fn feature_selection_drops_duplicates_and_respects_rho_one() {
    let mut ds = Dataset::new();
    let ctx = default_ctx();
    // dl_tx_symbols is an exact multiple of dl_phy_tbs here, so their
    // correlation is exactly 1.
    for i in 0..50u64 {
        let rec = KpmRecord {
            timestamp_ms: i * 250,
            bs_id: 0,
            ue_id: 0,
            slice: SliceId::Embb,
            dl_mcs: (i % 13) as f64,
            dl_tx_symbols: (i % 7) * 120,
            dl_buffer_bytes: 1000 - i * 3,
            dl_rate_bps: (i % 5) as f64 * 1e5,
            dl_phy_tbs: i % 7,
            dl_cqi: (i % 13) as f64 / 2.0,
            ul_buffer_bytes: i % 11,
            ul_rate_bps: (i % 3) as f64,
            ul_errors: i % 2,
            granted_prbs: i % 9,
            requested_prbs: i % 9 + 1,
        };
        ds.append_records(&[rec], &ctx).unwrap();
    }
    let candidates = ["dl_phy_tbs", "dl_tx_symbols", "dl_buffer_bytes", "dl_mcs"];
    let filter = RowFilter::default();

    let report = feature_report(&ds, &candidates, 0.9, &filter).unwrap();
    assert_eq!(
        report.selected,
        vec!["dl_phy_tbs", "dl_buffer_bytes", "dl_mcs"]
    );
    assert_eq!(report.dropped.len(), 1);
    assert_eq!(report.dropped[0].metric, "dl_tx_symbols");
    assert_eq!(report.dropped[0].against, "dl_phy_tbs");

    // rho = 1.0 keeps everything: |r| > 1 never holds.
    let keep_all = feature_report(&ds, &candidates, 1.0, &filter).unwrap();
    assert_eq!(keep_all.selected.len(), candidates.len());
    assert!(keep_all.dropped.is_empty());

    // Selection output is always a subset of the input, in input order.
    for m in &report.selected {
        assert!(candidates.contains(&m.as_str()));
    }
}

/// Paper-style reproduction on generated data: redundant TB/symbol counts,
/// negative MCS-buffer correlation on the loaded slice, weaker on URLLC.
#[test]
fn generated_embb_data_reproduces_correlation_signs() {
    let ds = collect_windows(480, 77); // 120 simulated seconds, 1 BS
    let embb = RowFilter::slice(SliceId::Embb);
    let urllc = RowFilter::slice(SliceId::Urllc);

    let report = correlation_matrix(&ds, &sim_core::TRACKED_METRICS, &embb).unwrap();
    let tbs_sym = report
        .get("dl_phy_tbs", "dl_tx_symbols")
        .unwrap()
        .value()
        .expect("defined");
    assert!(tbs_sym > 0.9, "corr(tbs, symbols) = {tbs_sym}");

    let mcs_buf = report
        .get("dl_mcs", "dl_buffer_bytes")
        .unwrap()
        .value()
        .expect("defined");
    assert!(mcs_buf < 0.0, "corr(mcs, buffer) = {mcs_buf}");

    let urllc_report =
        correlation_matrix(&ds, &["dl_mcs", "dl_buffer_bytes"], &urllc).unwrap();
    let urllc_mcs_buf = urllc_report
        .get("dl_mcs", "dl_buffer_bytes")
        .unwrap()
        .value()
        .unwrap_or(0.0);
    assert!(
        urllc_mcs_buf.abs() < mcs_buf.abs(),
        "urllc {urllc_mcs_buf} vs embb {mcs_buf}"
    );
}
