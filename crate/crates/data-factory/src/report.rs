//! Correlation matrices and greedy redundancy-based feature selection.

use crate::dataset::{Dataset, RowFilter};
use crate::stats::{pair_count, pearson, CorrValue};
use crate::DataError;

/// Pairwise Pearson matrix over a metric list, with per-pair sample counts.
#[derive(Debug, Clone)]
pub struct CorrelationReport {
    pub metrics: Vec<String>,
    pub matrix: Vec<Vec<CorrValue>>,
    pub counts: Vec<Vec<usize>>,
}

impl CorrelationReport {
    pub fn get(&self, a: &str, b: &str) -> Option<CorrValue> {
        let i = self.metrics.iter().position(|m| m == a)?;
        let j = self.metrics.iter().position(|m| m == b)?;
        Some(self.matrix[i][j])
    }

    /// Matrix as CSV: header row of metric names, one row per metric.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("metric,");
        out.push_str(&self.metrics.join(","));
        out.push('\n');
        for (i, name) in self.metrics.iter().enumerate() {
            out.push_str(name);
            for j in 0..self.metrics.len() {
                out.push(',');
                out.push_str(&self.matrix[i][j].to_string());
            }
            out.push('\n');
        }
        out
    }

    /// Human-readable summary of the strongest relationships.
    pub fn summary_text(&self) -> String {
        let mut pairs: Vec<(f64, &str, &str)> = Vec::new();
        for i in 0..self.metrics.len() {
            for j in (i + 1)..self.metrics.len() {
                if let CorrValue::Defined(v) = self.matrix[i][j] {
                    pairs.push((v, &self.metrics[i], &self.metrics[j]));
                }
            }
        }
        pairs.sort_by(|a, b| b.0.abs().partial_cmp(&a.0.abs()).unwrap());
        let mut out = String::new();
        for (v, a, b) in pairs {
            out.push_str(&format!("{a} ~ {b}: {v:.4}\n"));
        }
        out
    }
}

/// Computes the pairwise Pearson matrix over the filtered rows. The matrix
/// is exactly symmetric with a unit diagonal; undefined cells keep their
/// marker.
pub fn correlation_matrix(
    ds: &Dataset,
    metrics: &[&str],
    filter: &RowFilter,
) -> Result<CorrelationReport, DataError> {
    let series: Vec<Vec<f64>> = metrics
        .iter()
        .map(|m| ds.series(m, filter))
        .collect::<Result<_, _>>()?;
    if series.iter().all(|s| s.is_empty()) {
        return Err(DataError::EmptyFilter);
    }
    let k = metrics.len();
    let mut matrix = vec![vec![CorrValue::Undefined; k]; k];
    let mut counts = vec![vec![0usize; k]; k];
    for i in 0..k {
        matrix[i][i] = CorrValue::Defined(1.0);
        counts[i][i] = series[i].iter().filter(|v| !v.is_nan()).count();
        for j in (i + 1)..k {
            let r = pearson(&series[i], &series[j])?;
            let n = pair_count(&series[i], &series[j]);
            matrix[i][j] = r;
            matrix[j][i] = r;
            counts[i][j] = n;
            counts[j][i] = n;
        }
    }
    Ok(CorrelationReport {
        metrics: metrics.iter().map(|m| m.to_string()).collect(),
        matrix,
        counts,
    })
}

/// A candidate rejected for redundancy, with the metric it duplicated.
#[derive(Debug, Clone, PartialEq)]
pub struct DroppedFeature {
    pub metric: String,
    pub against: String,
    pub corr: f64,
}

/// Feature-selection outcome: the kept subset plus the justification table.
#[derive(Debug, Clone)]
pub struct FeatureReport {
    pub selected: Vec<String>,
    pub dropped: Vec<DroppedFeature>,
}

impl FeatureReport {
    pub fn table_text(&self) -> String {
        let mut out = String::from("selected:\n");
        for m in &self.selected {
            out.push_str(&format!("  {m}\n"));
        }
        out.push_str("dropped (redundant):\n");
        for d in &self.dropped {
            out.push_str(&format!(
                "  {} (|r| = {:.4} against {})\n",
                d.metric,
                d.corr.abs(),
                d.against
            ));
        }
        out
    }
}

/// Greedy redundancy filter: walk the candidates in order, keep a metric
/// unless its |correlation| against an already-kept metric exceeds `rho`.
/// Deterministic given the candidate order; undefined correlations never
/// disqualify a candidate.
pub fn feature_report(
    ds: &Dataset,
    candidates: &[&str],
    rho: f64,
    filter: &RowFilter,
) -> Result<FeatureReport, DataError> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(DataError::Argument(format!(
            "redundancy threshold {rho} outside (0, 1]"
        )));
    }
    let report = correlation_matrix(ds, candidates, filter)?;
    let mut selected: Vec<usize> = Vec::new();
    let mut dropped = Vec::new();
    for i in 0..candidates.len() {
        let mut redundant = None;
        for &s in &selected {
            if let CorrValue::Defined(r) = report.matrix[i][s] {
                if r.abs() > rho {
                    redundant = Some((s, r));
                    break;
                }
            }
        }
        match redundant {
            Some((s, r)) => dropped.push(DroppedFeature {
                metric: candidates[i].to_string(),
                against: candidates[s].to_string(),
                corr: r,
            }),
            None => selected.push(i),
        }
    }
    Ok(FeatureReport {
        selected: selected.iter().map(|&i| candidates[i].to_string()).collect(),
        dropped,
    })
}
