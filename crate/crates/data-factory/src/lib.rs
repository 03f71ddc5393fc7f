//! KPM dataset persistence and analysis: CSV datasets tagged with control
//! context, Pearson correlation matrices, linear fits and redundancy-based
//! feature selection.

pub mod dataset;
pub mod report;
pub mod stats;

pub use dataset::{Dataset, DatasetWriter, Row, RowContext, RowFilter, SCHEMA};
pub use report::{correlation_matrix, feature_report, CorrelationReport, FeatureReport};
pub use stats::{linear_fit, pearson, CorrValue};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("schema mismatch: {found}")]
    SchemaMismatch { found: String },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("filter matched no rows")]
    EmptyFilter,
    #[error("io error: {0}")]
    Io(String),
}
