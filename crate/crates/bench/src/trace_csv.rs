//! Per-iteration CSV traces.
//!
//! Floats are written in Rust's shortest round-trip form, so reading a file
//! back reproduces the records exactly. Missing values are empty cells.

use std::io::{Read, Write};

use geopg_core::{EvalCounters, TraceRecord};
use thiserror::Error;

pub const HEADER: [&str; 11] = [
    "iter", "time_s", "F", "rel_gap", "gmap_inf", "t_k", "Rk_sq", "f_ev", "g_ev", "p_ev", "mvm",
];

#[derive(Debug, Error)]
pub enum TraceCsvError {
    #[error("unexpected header {0:?}")]
    Header(Vec<String>),
    #[error("bad value `{value}` in column {column} of row {row}")]
    Value { row: usize, column: &'static str, value: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_trace<W: Write>(records: &[TraceRecord], out: W) -> Result<(), TraceCsvError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in records {
        w.write_record([
            r.iter.to_string(),
            r.elapsed.to_string(),
            r.f.to_string(),
            opt(r.rel_gap),
            r.gmap_inf.to_string(),
            opt(r.t_k),
            opt(r.r_sq),
            r.counters.f_ev.to_string(),
            r.counters.g_ev.to_string(),
            r.counters.p_ev.to_string(),
            r.counters.mvm.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace<R: Read>(input: R) -> Result<Vec<TraceRecord>, TraceCsvError> {
    let mut rd = csv::Reader::from_reader(input);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    if header != HEADER {
        return Err(TraceCsvError::Header(header));
    }
    let mut out = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        let cell = |k: usize| rec.get(k).unwrap_or("");
        let bad = |k: usize| TraceCsvError::Value {
            row,
            column: HEADER[k],
            value: cell(k).to_string(),
        };
        let float = |k: usize| cell(k).parse::<f64>().map_err(|_| bad(k));
        let opt_float = |k: usize| {
            if cell(k).is_empty() {
                Ok(None)
            } else {
                float(k).map(Some)
            }
        };
        let count = |k: usize| cell(k).parse::<u64>().map_err(|_| bad(k));
        out.push(TraceRecord {
            iter: cell(0).parse().map_err(|_| bad(0))?,
            elapsed: float(1)?,
            f: float(2)?,
            rel_gap: opt_float(3)?,
            gmap_inf: float(4)?,
            t_k: opt_float(5)?,
            r_sq: opt_float(6)?,
            counters: EvalCounters {
                f_ev: count(7)?,
                g_ev: count(8)?,
                p_ev: count(9)?,
                mvm: count(10)?,
            },
        });
    }
    Ok(out)
}
