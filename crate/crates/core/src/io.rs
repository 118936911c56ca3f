//! File formats.
//!
//! HSIC layout (all integers and floats little-endian):
//!
//! ```text
//! offset  size  field
//! 0       4     magic "HSIC"
//! 4       4     format version (u32) = 1
//! 8       4     rows (u32)
//! 12      4     cols (u32)
//! 16      4     bands (u32)
//! 20      8*B*R*C  f64 payload, band-major then row-major
//! ```
//!
//! Endmember libraries are plain CSV: one line per band, one column per
//! endmember, with an optional single header line.

use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;

use crate::cube::{AbundanceMatrix, EndmemberMatrix, SpectralCube};
use crate::engine::{IterationRecord, ObjectiveBreakdown, RunTrace};
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const HSIC_MAGIC: &[u8; 4] = b"HSIC";
pub const HSIC_VERSION: u32 = 1;
const HEADER_LEN: usize = 20;

/// Raw contents of an HSIC file: spatial dims and a `bands x (rows*cols)` payload.
#[derive(Debug, Clone, PartialEq)]
pub struct HsicImage {
    pub rows: usize,
    pub cols: usize,
    pub data: Array2<f64>,
}

pub fn encode_hsic(rows: usize, cols: usize, data: &Array2<f64>) -> Result<Vec<u8>> {
    if data.ncols() != rows * cols {
        return Err(Error::dim("HSIC payload", rows * cols, data.ncols()));
    }
    let dim = |v: usize| u32::try_from(v).map_err(|_| Error::Format(format!("dimension {v} exceeds u32")));
    let mut buf = Vec::with_capacity(HEADER_LEN + 8 * data.len());
    buf.extend_from_slice(HSIC_MAGIC);
    buf.extend_from_slice(&HSIC_VERSION.to_le_bytes());
    buf.extend_from_slice(&dim(rows)?.to_le_bytes());
    buf.extend_from_slice(&dim(cols)?.to_le_bytes());
    buf.extend_from_slice(&dim(data.nrows())?.to_le_bytes());
    for v in data.iter() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    Ok(buf)
}

pub fn decode_hsic(bytes: &[u8]) -> Result<HsicImage> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Truncated {
            expected: HEADER_LEN,
            found: bytes.len(),
        });
    }
    if &bytes[0..4] != HSIC_MAGIC {
        return Err(Error::Format(format!("bad magic {:?}", &bytes[0..4])));
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
    let version = word(4);
    if version != HSIC_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let (rows, cols, bands) = (word(8) as usize, word(12) as usize, word(16) as usize);
    if rows == 0 || cols == 0 || bands == 0 {
        return Err(Error::Format(format!("empty dimensions {rows}x{cols}x{bands}")));
    }
    let count = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(bands))
        .ok_or_else(|| Error::Format("dimensions overflow".into()))?;
    let expected = HEADER_LEN + 8 * count;
    if bytes.len() < expected {
        return Err(Error::Truncated {
            expected,
            found: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(Error::Format(format!(
            "{} trailing bytes after payload",
            bytes.len() - expected
        )));
    }
    let mut values = Vec::with_capacity(count);
    for (index, chunk) in bytes[HEADER_LEN..].chunks_exact(8).enumerate() {
        let v = f64::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(Error::NonFinite {
                what: "HSIC payload",
                index,
            });
        }
        values.push(v);
    }
    let data = Array2::from_shape_vec((bands, rows * cols), values).expect("length checked");
    Ok(HsicImage { rows, cols, data })
}

pub fn read_hsic(path: impl AsRef<Path>) -> Result<HsicImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_hsic(&bytes)
}

pub fn write_hsic(path: impl AsRef<Path>, rows: usize, cols: usize, data: &Array2<f64>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_hsic(rows, cols, data)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Loads a cube. Negative values are accepted (noisy data) and recorded on the cube.
pub fn load_cube<T: Real>(path: impl AsRef<Path>) -> Result<SpectralCube<T>> {
    let img = read_hsic(path)?;
    SpectralCube::with_negatives(img.rows, img.cols, img.data.mapv(T::of)).map(|c| {
        if c.data().iter().any(|v| *v < T::zero()) {
            c
        } else {
            c.clamp_nonnegative()
        }
    })
}

pub fn store_cube<T: Real>(cube: &SpectralCube<T>, path: impl AsRef<Path>) -> Result<()> {
    write_hsic(path, cube.rows(), cube.cols(), &cube.data().mapv(|v| v.as_f64()))
}

/// Abundance maps persisted as HSIC with one "band" per endmember.
pub fn store_abundances<T: Real>(
    a: &AbundanceMatrix<T>,
    rows: usize,
    cols: usize,
    path: impl AsRef<Path>,
) -> Result<()> {
    write_hsic(path, rows, cols, &a.data().mapv(|v| v.as_f64()))
}

/// Returns the abundances and their spatial `(rows, cols)`.
pub fn load_abundances<T: Real>(path: impl AsRef<Path>) -> Result<(AbundanceMatrix<T>, usize, usize)> {
    let img = read_hsic(path)?;
    let a = AbundanceMatrix::new(img.data.mapv(T::of))?;
    Ok((a, img.rows, img.cols))
}

pub fn parse_endmember_csv<T: Real>(text: &str) -> Result<EndmemberMatrix<T>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 1;
        let record = record.map_err(|e| Error::Csv {
            line,
            message: e.to_string(),
        })?;
        if record.iter().all(|c| c.is_empty()) {
            continue;
        }
        let parsed: Vec<Option<f64>> = record.iter().map(|c| c.parse::<f64>().ok()).collect();
        if i == 0 && parsed.iter().any(Option::is_none) {
            // header line
            continue;
        }
        let mut values = Vec::with_capacity(parsed.len());
        for (col, (cell, v)) in record.iter().zip(parsed).enumerate() {
            let v = v.ok_or_else(|| Error::Csv {
                line,
                message: format!("non-numeric cell {cell:?} in column {}", col + 1),
            })?;
            if !v.is_finite() {
                return Err(Error::Csv {
                    line,
                    message: format!("non-finite cell {cell:?}"),
                });
            }
            if v < 0.0 {
                return Err(Error::Negative {
                    what: "endmember CSV",
                    row: rows.len(),
                    col,
                    value: v,
                });
            }
            values.push(v);
        }
        if let Some(first) = rows.first() {
            if first.len() != values.len() {
                return Err(Error::Csv {
                    line,
                    message: format!("expected {} columns, found {}", first.len(), values.len()),
                });
            }
        }
        rows.push(values);
    }
    if rows.is_empty() {
        return Err(Error::Csv {
            line: 0,
            message: "no numeric rows".into(),
        });
    }
    let (l, p) = (rows.len(), rows[0].len());
    let flat: Vec<T> = rows.into_iter().flatten().map(T::of).collect();
    EndmemberMatrix::new(Array2::from_shape_vec((l, p), flat).expect("rectangular"))
}

pub fn load_endmember_csv<T: Real>(path: impl AsRef<Path>) -> Result<EndmemberMatrix<T>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_endmember_csv(&text)
}

/// Formats endmembers as CSV with shortest round-trip float formatting.
pub fn format_endmember_csv<T: Real>(e: &EndmemberMatrix<T>) -> String {
    let mut out = String::new();
    for row in e.data().rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{}", v.as_f64())).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn store_endmember_csv<T: Real>(e: &EndmemberMatrix<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_endmember_csv(e)).map_err(|e| Error::io(path, e))
}

pub const TRACE_HEADER: &str = "iter,objective,data_fit,l21,split,rmse,seconds";

/// Trace CSV. A missing RMSE (no ground truth) is written as an empty cell;
/// wall time is written only when `with_timing` is set, so runs with equal
/// inputs produce identical files by default.
pub fn store_trace(trace: &RunTrace, path: impl AsRef<Path>, with_timing: bool) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::new();
    let mut emit = || -> std::io::Result<()> {
        writeln!(out, "{TRACE_HEADER}")?;
        for r in trace.records() {
            let rmse = r.rmse.map(|v| v.to_string()).unwrap_or_default();
            let seconds = if with_timing { r.seconds.to_string() } else { String::new() };
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.iter, r.objective.total, r.objective.data_fit, r.objective.l21, r.objective.split, rmse, seconds
            )?;
        }
        Ok(())
    };
    emit().map_err(|e| Error::io(path, e))?;
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Reads a trace written by [`store_trace`]. Missing wall times load as 0.
pub fn load_trace(path: impl AsRef<Path>) -> Result<RunTrace> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == TRACE_HEADER => {}
        _ => return Err(Error::Format(format!("{} is not a trace file", path.display()))),
    }
    let mut records = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| Error::Csv { line: i + 1, message };
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 7 {
            return Err(bad(format!("expected 7 cells, found {}", cells.len())));
        }
        let num = |k: usize| -> Result<f64> {
            cells[k].trim().parse().map_err(|_| bad(format!("invalid number {:?}", cells[k])))
        };
        let optional = |k: usize| -> Result<Option<f64>> {
            if cells[k].trim().is_empty() {
                Ok(None)
            } else {
                num(k).map(Some)
            }
        };
        let iter = cells[0].trim().parse().map_err(|_| bad(format!("invalid iteration {:?}", cells[0])))?;
        records.push(IterationRecord {
            iter,
            objective: ObjectiveBreakdown {
                total: num(1)?,
                data_fit: num(2)?,
                l21: num(3)?,
                split: num(4)?,
            },
            rmse: optional(5)?,
            seconds: optional(6)?.unwrap_or(0.0),
        });
    }
    Ok(RunTrace::from_records(records))
}
