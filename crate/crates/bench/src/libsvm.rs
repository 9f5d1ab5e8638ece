//! LIBSVM text format: `<label> <idx>:<val> ...`, one sample per line,
//! 1-based strictly increasing feature indices.

use std::io::{self, BufRead, Write};

use geopg_core::{SparseDesign, SparseError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LibsvmError {
    #[error("malformed token `{token}` at line {line}")]
    Malformed { line: usize, token: String },
    #[error("non-increasing index at line {line}")]
    NonIncreasing { line: usize },
    #[error("index < 1 at line {line}")]
    ZeroIndex { line: usize },
    #[error("index {index} exceeds the requested {cols} columns at line {line}")]
    TooWide { line: usize, index: usize, cols: usize },
    #[error(transparent)]
    Design(#[from] SparseError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Parses LIBSVM text. Without `cols` the width is the largest index seen.
pub fn parse_libsvm<R: BufRead>(reader: R, cols: Option<usize>) -> Result<SparseDesign, LibsvmError> {
    let mut rows = Vec::new();
    let mut targets = Vec::new();
    let mut width = 0usize;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let body = line.split('#').next().unwrap_or("");
        let mut tokens = body.split_whitespace();
        let Some(label) = tokens.next() else { continue };
        let label: f64 = label
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| LibsvmError::Malformed {
                line: lineno,
                token: label.to_string(),
            })?;
        let mut row = Vec::new();
        let mut last = 0usize;
        for tok in tokens {
            let malformed = || LibsvmError::Malformed {
                line: lineno,
                token: tok.to_string(),
            };
            let (idx, val) = tok.split_once(':').ok_or_else(malformed)?;
            let idx: usize = idx.parse().map_err(|_| malformed())?;
            let val: f64 = val.parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(malformed)?;
            if idx < 1 {
                return Err(LibsvmError::ZeroIndex { line: lineno });
            }
            if idx <= last {
                return Err(LibsvmError::NonIncreasing { line: lineno });
            }
            if let Some(c) = cols {
                if idx > c {
                    return Err(LibsvmError::TooWide {
                        line: lineno,
                        index: idx,
                        cols: c,
                    });
                }
            }
            last = idx;
            row.push((idx - 1, val));
        }
        width = width.max(last);
        rows.push(row);
        targets.push(label);
    }
    Ok(SparseDesign::from_rows(cols.unwrap_or(width), rows, targets)?)
}

pub fn parse_libsvm_str(text: &str, cols: Option<usize>) -> Result<SparseDesign, LibsvmError> {
    parse_libsvm(text.as_bytes(), cols)
}

/// Writes `design` in LIBSVM format. Numbers use the shortest
/// representation that parses back to the same value, so ±1 labels come
/// out as integers.
pub fn write_libsvm<W: Write>(design: &SparseDesign, mut out: W) -> io::Result<()> {
    for (r, b) in design.targets().iter().enumerate() {
        write!(out, "{b}")?;
        for (c, v) in design.row(r) {
            write!(out, " {}:{v}", c + 1)?;
        }
        writeln!(out)?;
    }
    Ok(())
}
