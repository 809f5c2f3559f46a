use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::SimTime;

/// Kinds of events recorded in the trace stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceKind {
    Enqueue,
    Drop,
    TxStart,
    TxSuccess,
    Collision,
    LimitUpdate,
    CwndUpdate,
}

impl TraceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TraceKind::Enqueue => "enqueue",
            TraceKind::Drop => "drop",
            TraceKind::TxStart => "tx-start",
            TraceKind::TxSuccess => "tx-success",
            TraceKind::Collision => "collision",
            TraceKind::LimitUpdate => "limit-update",
            TraceKind::CwndUpdate => "cwnd-update",
        }
    }
}

impl fmt::Display for TraceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One trace record. Records are emitted in non-decreasing time order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub time: SimTime,
    pub station: u16,
    pub kind: TraceKind,
    pub value: f64,
}

/// Destination for trace records.
///
/// The CSV form writes `time,station,kind,value` with a header row and LF
/// line endings; for a fixed (config, seed) pair the file is byte-identical
/// across runs.
pub enum TraceSink {
    Disabled,
    Memory(Vec<TraceRecord>),
    Csv(BufWriter<File>),
}

impl TraceSink {
    pub fn disabled() -> TraceSink {
        TraceSink::Disabled
    }

    pub fn memory() -> TraceSink {
        TraceSink::Memory(Vec::new())
    }

    pub fn csv(path: &Path) -> std::io::Result<TraceSink> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(b"time,station,kind,value\n")?;
        Ok(TraceSink::Csv(w))
    }

    pub fn enabled(&self) -> bool {
        !matches!(self, TraceSink::Disabled)
    }

    pub fn emit(&mut self, rec: TraceRecord) {
        match self {
            TraceSink::Disabled => {}
            TraceSink::Memory(v) => v.push(rec),
            TraceSink::Csv(w) => {
                // Default f64 formatting is shortest-roundtrip, so output is
                // platform independent.
                let _ = writeln!(
                    w,
                    "{},{},{},{}",
                    rec.time.secs(),
                    rec.station,
                    rec.kind,
                    rec.value
                );
            }
        }
    }

    pub fn flush(&mut self) -> std::io::Result<()> {
        if let TraceSink::Csv(w) = self {
            w.flush()?;
        }
        Ok(())
    }

    pub fn records(&self) -> &[TraceRecord] {
        match self {
            TraceSink::Memory(v) => v,
            _ => &[],
        }
    }
}
