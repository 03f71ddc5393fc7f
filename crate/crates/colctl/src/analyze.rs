//! Analysis workflow: correlation matrices, linear fits and feature
//! reports per slice, as produced by the data factory.

use std::path::PathBuf;

use data_factory::{correlation_matrix, feature_report, linear_fit, RowFilter};
use sim_core::{SliceId, SlicingProfile, TRACKED_METRICS};

use crate::collect::load_dataset;
use crate::ExperimentError;

pub struct AnalyzeSpec {
    pub dataset: PathBuf,
    pub out_dir: PathBuf,
    pub rho: f64,
    /// Restricts the analysis to rows collected under one slicing profile.
    pub slicing_filter: Option<SlicingProfile>,
}

pub struct AnalyzeSummary {
    pub reports: Vec<(SliceId, PathBuf)>,
}

/// The scatter pairs reported alongside each matrix.
const FIT_PAIRS: [(&str, &str); 3] = [
    ("dl_mcs", "dl_buffer_bytes"),
    ("dl_tx_symbols", "dl_phy_tbs"),
    ("dl_phy_tbs", "dl_buffer_bytes"),
];

pub fn run_analyze(spec: &AnalyzeSpec) -> Result<AnalyzeSummary, ExperimentError> {
    let ds = load_dataset(&spec.dataset)?;
    std::fs::create_dir_all(&spec.out_dir)
        .map_err(|e| ExperimentError::Runtime(e.to_string()))?;
    let mut reports = Vec::new();
    let mut summary = String::new();
    for slice in SliceId::ALL {
        let filter = RowFilter {
            slice: Some(slice),
            slicing: spec.slicing_filter,
            ..Default::default()
        };
        let report = correlation_matrix(&ds, &TRACKED_METRICS, &filter)
            .map_err(|e| ExperimentError::Runtime(format!("{slice}: {e}")))?;
        let path = spec.out_dir.join(format!("corr_{slice}.csv"));
        std::fs::write(&path, report.to_csv_string())
            .map_err(|e| ExperimentError::Runtime(e.to_string()))?;
        summary.push_str(&format!("== {slice} ==\n{}", report.summary_text()));

        let features = feature_report(&ds, &TRACKED_METRICS, spec.rho, &filter)
            .map_err(|e| ExperimentError::Runtime(e.to_string()))?;
        std::fs::write(
            spec.out_dir.join(format!("features_{slice}.txt")),
            features.table_text(),
        )
        .map_err(|e| ExperimentError::Runtime(e.to_string()))?;

        let mut fits = String::from("x,y,slope,intercept\n");
        for (x, y) in FIT_PAIRS {
            let xs = ds
                .series(x, &filter)
                .map_err(|e| ExperimentError::Runtime(e.to_string()))?;
            let ys = ds
                .series(y, &filter)
                .map_err(|e| ExperimentError::Runtime(e.to_string()))?;
            match linear_fit(&xs, &ys) {
                Ok((slope, intercept)) => {
                    fits.push_str(&format!("{x},{y},{slope},{intercept}\n"));
                }
                Err(_) => fits.push_str(&format!("{x},{y},,\n")),
            }
        }
        std::fs::write(spec.out_dir.join(format!("fits_{slice}.csv")), fits)
            .map_err(|e| ExperimentError::Runtime(e.to_string()))?;
        reports.push((slice, path));
    }
    std::fs::write(spec.out_dir.join("summary.txt"), summary)
        .map_err(|e| ExperimentError::Runtime(e.to_string()))?;
    Ok(AnalyzeSummary { reports })
}
