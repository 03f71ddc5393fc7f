//! Shared closed-loop plumbing for the experiment workflows.

use ric_nrt::{ClosedLoop, RicConfig};
use sim_core::ScenarioConfig;

use crate::ExperimentError;

pub fn build_loop(
    scenario: &ScenarioConfig,
    ric_cfg: RicConfig,
) -> Result<ClosedLoop, ExperimentError> {
    ClosedLoop::new(scenario, ric_cfg).map_err(|e| ExperimentError::Runtime(e.to_string()))
}

/// Writes a CSV of per-update training rows.
pub fn write_loss_csv(
    path: &std::path::Path,
    rows: &[xapp_suite::UpdateRow],
) -> Result<(), ExperimentError> {
    use std::io::Write;
    let mut out = std::io::BufWriter::new(
        std::fs::File::create(path).map_err(|e| ExperimentError::Runtime(e.to_string()))?,
    );
    writeln!(out, "step,policy_loss,value_loss,entropy_loss,mean_reward")
        .map_err(|e| ExperimentError::Runtime(e.to_string()))?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.global_step, r.policy_loss, r.value_loss, r.entropy_loss, r.mean_reward
        )
        .map_err(|e| ExperimentError::Runtime(e.to_string()))?;
    }
    out.flush().map_err(|e| ExperimentError::Runtime(e.to_string()))
}

/// Empirical CDF of a sample set: sorted (value, cumulative probability).
pub fn cdf_points(samples: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted: Vec<f64> = samples.iter().copied().filter(|v| v.is_finite()).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len().max(1) as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, (i + 1) as f64 / n))
        .collect()
}

/// Percentile by nearest-rank on a sample set.
pub fn percentile(samples: &[f64], p: f64) -> f64 {
    let mut sorted: Vec<f64> = samples.iter().copied().filter(|v| v.is_finite()).collect();
    if sorted.is_empty() {
        return f64::NAN;
    }
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let rank = ((p * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

pub fn mean(samples: &[f64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().sum::<f64>() / samples.len() as f64
}

pub fn variance(samples: &[f64]) -> f64 {
    if samples.len() < 2 {
        return 0.0;
    }
    let m = mean(samples);
    samples.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / samples.len() as f64
}
