//! Dataset storage: KPM rows tagged with the control profiles that were in
//! force when they were collected, with lossless CSV read/write.
//!
//! CSV formatting rule: integers print as decimal integers, floats with
//! Rust's shortest round-trip representation, slices by name and schedulers
//! as RR/WF/PF. Every numeric field therefore survives a write/read cycle
//! exactly.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use sim_core::{KpmRecord, SchedPolicy, SchedulingProfile, SliceId, SlicingProfile};

use crate::DataError;

/// Column names, in file order: identifiers, control context, then metrics.
pub const SCHEMA: [&str; 21] = [
    "timestamp_ms",
    "bs_id",
    "ue_id",
    "slice",
    "prb_embb",
    "prb_mtc",
    "prb_urllc",
    "sched_embb",
    "sched_mtc",
    "sched_urllc",
    "dl_mcs",
    "dl_tx_symbols",
    "dl_buffer_bytes",
    "dl_rate_bps",
    "dl_phy_tbs",
    "dl_cqi",
    "ul_buffer_bytes",
    "ul_rate_bps",
    "ul_errors",
    "granted_prbs",
    "requested_prbs",
];

/// Control profiles in force when a row was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RowContext {
    pub slicing: SlicingProfile,
    pub scheduling: SchedulingProfile,
}

/// One dataset row.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub record: KpmRecord,
    pub ctx: RowContext,
}

/// Filter over dataset rows; `None` fields match everything.
#[derive(Debug, Clone, Copy, Default)]
pub struct RowFilter {
    pub slice: Option<SliceId>,
    pub slicing: Option<SlicingProfile>,
    pub scheduling: Option<SchedulingProfile>,
    pub bs_id: Option<u32>,
}

impl RowFilter {
    pub fn slice(slice: SliceId) -> Self {
        Self {
            slice: Some(slice),
            ..Default::default()
        }
    }

    pub fn matches(&self, row: &Row) -> bool {
        self.slice.map_or(true, |s| row.record.slice == s)
            && self.slicing.map_or(true, |p| row.ctx.slicing == p)
            && self.scheduling.map_or(true, |p| row.ctx.scheduling == p)
            && self.bs_id.map_or(true, |b| row.record.bs_id == b)
    }
}

/// In-memory dataset with a profile index.
#[derive(Debug, Clone, Default)]
pub struct Dataset {
    rows: Vec<Row>,
}

impl Dataset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    /// Appends one reporting window's records under the given control
    /// context. Records are validated first; nothing is appended on error.
    pub fn append_records(
        &mut self,
        records: &[KpmRecord],
        ctx: &RowContext,
    ) -> Result<(), DataError> {
        for r in records {
            for (name, v) in [
                ("dl_mcs", r.dl_mcs),
                ("dl_rate_bps", r.dl_rate_bps),
                ("dl_cqi", r.dl_cqi),
                ("ul_rate_bps", r.ul_rate_bps),
            ] {
                if v.is_infinite() {
                    return Err(DataError::Argument(format!(
                        "non-finite value in column {name}"
                    )));
                }
            }
        }
        self.rows.extend(records.iter().map(|r| Row {
            record: r.clone(),
            ctx: *ctx,
        }));
        Ok(())
    }

    /// Extracts a metric column over the filtered rows. Unknown metrics are
    /// an error; missing values surface as NaN.
    pub fn series(&self, metric: &str, filter: &RowFilter) -> Result<Vec<f64>, DataError> {
        if !SCHEMA.contains(&metric) {
            return Err(DataError::SchemaMismatch {
                found: metric.to_string(),
            });
        }
        Ok(self
            .rows
            .iter()
            .filter(|r| filter.matches(r))
            .map(|r| r.record.metric(metric).unwrap_or(f64::NAN))
            .collect())
    }

    /// Distinct control contexts present, with row counts.
    pub fn contexts(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        for r in &self.rows {
            let key = format!("{}x{}", r.ctx.slicing, r.ctx.scheduling);
            *out.entry(key).or_insert(0) += 1;
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), DataError> {
        let mut w = DatasetWriter::create(path, usize::MAX)?;
        for r in &self.rows {
            w.write_row(&r.record, &r.ctx)?;
        }
        w.finish()?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self, DataError> {
        let mut reader = csv::Reader::from_path(path)
            .map_err(|e| DataError::Io(format!("{}: {e}", path.display())))?;
        let headers = reader
            .headers()
            .map_err(|e| DataError::Io(e.to_string()))?
            .clone();
        let found: Vec<&str> = headers.iter().collect();
        if found != SCHEMA {
            return Err(DataError::SchemaMismatch {
                found: found.join(","),
            });
        }
        let mut rows = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| DataError::Io(e.to_string()))?;
            rows.push(parse_row(&rec)?);
        }
        Ok(Self { rows })
    }
}

fn parse_row(rec: &csv::StringRecord) -> Result<Row, DataError> {
    fn field<'a>(rec: &'a csv::StringRecord, i: usize) -> Result<&'a str, DataError> {
        rec.get(i)
            .ok_or_else(|| DataError::Io(format!("row too short at column {i}")))
    }
    fn num<T: FromStr>(rec: &csv::StringRecord, i: usize) -> Result<T, DataError>
    where
        T::Err: std::fmt::Display,
    {
        let s = field(rec, i)?;
        s.parse()
            .map_err(|e| DataError::Io(format!("column {}: {e}", SCHEMA[i])))
    }
    // Empty cells in float columns read back as NaN (missing sample).
    fn float(rec: &csv::StringRecord, i: usize) -> Result<f64, DataError> {
        let s = field(rec, i)?;
        if s.is_empty() {
            return Ok(f64::NAN);
        }
        num::<f64>(rec, i)
    }

    let slice: SliceId = field(rec, 3)?
        .parse()
        .map_err(|e: sim_core::SimError| DataError::Io(e.to_string()))?;
    let sched = |i: usize| -> Result<SchedPolicy, DataError> {
        field(rec, i)?
            .parse()
            .map_err(|e: sim_core::SimError| DataError::Io(e.to_string()))
    };
    Ok(Row {
        record: KpmRecord {
            timestamp_ms: num(rec, 0)?,
            bs_id: num(rec, 1)?,
            ue_id: num(rec, 2)?,
            slice,
            dl_mcs: float(rec, 10)?,
            dl_tx_symbols: num(rec, 11)?,
            dl_buffer_bytes: num(rec, 12)?,
            dl_rate_bps: float(rec, 13)?,
            dl_phy_tbs: num(rec, 14)?,
            dl_cqi: float(rec, 15)?,
            ul_buffer_bytes: num(rec, 16)?,
            ul_rate_bps: float(rec, 17)?,
            ul_errors: num(rec, 18)?,
            granted_prbs: num(rec, 19)?,
            requested_prbs: num(rec, 20)?,
        },
        ctx: RowContext {
            slicing: SlicingProfile::new(num(rec, 4)?, num(rec, 5)?, num(rec, 6)?),
            scheduling: SchedulingProfile::new(sched(7)?, sched(8)?, sched(9)?),
        },
    })
}

/// Streaming CSV writer used by long collection runs: rows hit the file as
/// they arrive, flushed every `flush_every` rows.
pub struct DatasetWriter {
    out: BufWriter<File>,
    rows_since_flush: usize,
    flush_every: usize,
    pub rows_written: u64,
}

impl DatasetWriter {
    pub fn create(path: &Path, flush_every: usize) -> Result<Self, DataError> {
        let file = File::create(path)
            .map_err(|e| DataError::Io(format!("{}: {e}", path.display())))?;
        let mut out = BufWriter::new(file);
        writeln!(out, "{}", SCHEMA.join(",")).map_err(|e| DataError::Io(e.to_string()))?;
        Ok(Self {
            out,
            rows_since_flush: 0,
            flush_every: flush_every.max(1),
            rows_written: 0,
        })
    }

    pub fn write_row(&mut self, r: &KpmRecord, ctx: &RowContext) -> Result<(), DataError> {
        let s = &ctx.slicing.prbs;
        let p = &ctx.scheduling.policy;
        writeln!(
            self.out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.timestamp_ms,
            r.bs_id,
            r.ue_id,
            r.slice,
            s[0],
            s[1],
            s[2],
            p[0],
            p[1],
            p[2],
            r.dl_mcs,
            r.dl_tx_symbols,
            r.dl_buffer_bytes,
            r.dl_rate_bps,
            r.dl_phy_tbs,
            r.dl_cqi,
            r.ul_buffer_bytes,
            r.ul_rate_bps,
            r.ul_errors,
            r.granted_prbs,
            r.requested_prbs
        )
        .map_err(|e| DataError::Io(e.to_string()))?;
        self.rows_written += 1;
        self.rows_since_flush += 1;
        if self.rows_since_flush >= self.flush_every {
            self.out.flush().map_err(|e| DataError::Io(e.to_string()))?;
            self.rows_since_flush = 0;
        }
        Ok(())
    }

    pub fn write_records(
        &mut self,
        records: &[KpmRecord],
        ctx: &RowContext,
    ) -> Result<(), DataError> {
        for r in records {
            self.write_row(r, ctx)?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<(), DataError> {
        self.out.flush().map_err(|e| DataError::Io(e.to_string()))
    }
}
