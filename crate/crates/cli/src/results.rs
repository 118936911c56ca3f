//! The results table shared by `eval` and `bench`.

use std::fs::OpenOptions;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

/// Bumped whenever a column is added, removed or reordered.
pub const RESULTS_SCHEMA_VERSION: u32 = 1;
pub const RESULTS_HEADER: &str = "method,denoiser,snr_db,seed,rmse,sad_deg,psnr_db,re,iters,seconds";

/// One row of the results table. `method` is `nmf` for the baseline without
/// a denoiser prior and `pnmf` otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub method: String,
    pub denoiser: String,
    pub snr_db: Option<f64>,
    pub seed: u64,
    pub rmse: f64,
    pub sad_deg: f64,
    pub psnr_db: f64,
    pub re: Option<f64>,
    pub iters: usize,
    pub seconds: Option<f64>,
}

pub fn method_for(denoiser: &str, mu: f64) -> &'static str {
    if denoiser == "none" || mu == 0.0 {
        "nmf"
    } else {
        "pnmf"
    }
}

pub fn write_rows(rows: &[ResultRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Appends a row, writing the header first when the file is new or empty.
pub fn append_row(row: &ResultRow, path: &Path) -> Result<()> {
    let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let mut w = csv::WriterBuilder::new().has_headers(fresh).from_writer(file);
    w.serialize(row)?;
    w.flush()?;
    Ok(())
}

pub fn read_rows(path: &Path) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    anyhow::ensure!(
        header.join(",") == RESULTS_HEADER,
        "{} does not have the results header",
        path.display()
    );
    r.deserialize()
        .map(|row| row.with_context(|| format!("parsing {}", path.display())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(seed: u64) -> ResultRow {
        ResultRow {
            method: "pnmf".into(),
            denoiser: "nlm".into(),
            snr_db: Some(5.0),
            seed,
            rmse: 0.05,
            sad_deg: 4.5,
            psnr_db: f64::INFINITY,
            re: None,
            iters: 300,
            seconds: None,
        }
    }

    #[test]
    fn append_writes_one_header_and_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("results.csv");
        append_row(&row(1), &path).unwrap();
        append_row(&row(2), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().next().unwrap(), RESULTS_HEADER);
        assert_eq!(text.lines().count(), 3);
        assert_eq!(text.lines().nth(1).unwrap(), "pnmf,nlm,5.0,1,0.05,4.5,inf,,300,");
        assert_eq!(read_rows(&path).unwrap(), vec![row(1), row(2)]);
    }
}
