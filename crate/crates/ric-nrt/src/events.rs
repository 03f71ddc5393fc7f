//! Structured event log.
//!
//! One text line per event: `t=<ms> ev=<kind> <key>=<value> ...`, keys in
//! emission order. Kinds currently emitted: xapp_attached, node_registered,
//! node_replaced, node_evicted, sub_requested, sub_active, sub_rejected,
//! ind_unknown_sub, queue_drop, control_sent, control_acked,
//! control_timeout, session_reset, dup_dropped.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

#[derive(Debug, Default)]
pub struct EventLog {
    lines: Vec<String>,
    sink: Option<BufWriter<File>>,
}

impl EventLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_file(path: &Path) -> std::io::Result<Self> {
        Ok(Self {
            lines: Vec::new(),
            sink: Some(BufWriter::new(File::create(path)?)),
        })
    }

    pub fn log(&mut self, now_ms: u64, kind: &str, fields: &[(&str, String)]) {
        let mut line = format!("t={now_ms} ev={kind}");
        for (k, v) in fields {
            line.push_str(&format!(" {k}={v}"));
        }
        if let Some(sink) = &mut self.sink {
            let _ = writeln!(sink, "{line}");
        }
        self.lines.push(line);
    }

    pub fn lines(&self) -> &[String] {
        &self.lines
    }

    pub fn count(&self, kind: &str) -> usize {
        let token = format!("ev={kind}");
        self.lines
            .iter()
            .filter(|l| l.split_whitespace().any(|t| t == token))
            .count()
    }

    pub fn flush(&mut self) {
        if let Some(sink) = &mut self.sink {
            let _ = sink.flush();
        }
    }
}
