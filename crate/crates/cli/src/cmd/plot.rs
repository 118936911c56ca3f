use std::io::Write as _;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use ndarray::{ArrayView2, Axis};
use pnmf_core::io::{load_abundances, load_endmember_csv, load_trace};
use pnmf_core::metrics::{align, aligned_abundances};
use pnmf_core::{Abundances, Endmembers, RunTrace};

use crate::cmd::unmix::{load_truth, ABUNDANCES_FILE, ENDMEMBERS_FILE, TRACE_FILE};
use crate::output::{resolve, Staging};
use crate::svg::{Chart, Series};

pub const ENDMEMBERS_SVG: &str = "endmembers.svg";
pub const CONVERGENCE_SVG: &str = "convergence.svg";

pub fn map_file(k: usize) -> String {
    format!("abundance_{k}.ppm")
}

pub fn scale_file(k: usize) -> String {
    format!("abundance_{k}.txt")
}

/// Render abundance maps, endmember spectra and the convergence curve of a run.
#[derive(Debug, Clone, Args)]
pub struct PlotArgs {
    /// Output directory of `unmix`.
    #[arg(long)]
    pub run: PathBuf,
    /// Output directory of `synth`; orders the maps like the truth and overlays true spectra.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Where to write the figures [default: <run>/plots].
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

/// Binary PPM (P6) of one map, min-max scaled to 0..255, with the scale text.
/// A constant map becomes mid gray.
pub fn gray_ppm(map: ArrayView2<f64>) -> (Vec<u8>, String) {
    let (rows, cols) = map.dim();
    let lo = map.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = map.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let mut bytes = format!("P6\n{cols} {rows}\n255\n").into_bytes();
    for &v in map.iter() {
        let g = if span > 0.0 {
            ((v - lo) / span * 255.0).round() as u8
        } else {
            128
        };
        bytes.extend_from_slice(&[g, g, g]);
    }
    let note = if span > 0.0 {
        format!("min {lo}\nmax {hi}\n")
    } else {
        format!("min {lo}\nmax {hi}\ndegenerate scale: constant map shown as uniform gray\n")
    };
    (bytes, note)
}

pub fn spectra_chart(est: &Endmembers, truth: Option<&Endmembers>) -> String {
    let curve = |e: &Endmembers, k: usize| -> Vec<(f64, f64)> {
        e.column(k).iter().enumerate().map(|(b, &v)| (b as f64, v)).collect()
    };
    let mut series: Vec<Series> = (0..est.count())
        .map(|k| Series {
            label: format!("estimate {k}"),
            points: curve(est, k),
        })
        .collect();
    if let Some(t) = truth {
        series.extend((0..t.count()).map(|k| Series {
            label: format!("truth {k}"),
            points: curve(t, k),
        }));
    }
    Chart {
        title: "Endmember spectra",
        x_label: "band",
        y_label: "reflectance",
        series,
    }
    .render()
}

/// RMSE against truth when the trace has it, otherwise the objective.
pub fn convergence_series(trace: &RunTrace, label: &str) -> (Series, &'static str) {
    let with_rmse = !trace.is_empty() && trace.records().iter().all(|r| r.rmse.is_some());
    let points = trace
        .records()
        .iter()
        .map(|r| {
            let y = if with_rmse { r.rmse.unwrap_or(f64::NAN) } else { r.objective.total };
            (r.iter as f64, y)
        })
        .collect();
    let y_label = if with_rmse { "RMSE" } else { "objective" };
    (
        Series {
            label: label.into(),
            points,
        },
        y_label,
    )
}

fn write_file(stage: &mut Staging, name: &str, bytes: &[u8]) -> Result<()> {
    let path = stage.file(name)?;
    let mut f = std::fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    f.write_all(bytes)?;
    Ok(())
}

pub fn run(args: &PlotArgs) -> Result<PathBuf> {
    let run_dir = resolve(&args.run);
    let dir = match &args.output {
        Some(p) => resolve(p),
        None => run_dir.join("plots"),
    };
    let mut e: Endmembers = load_endmember_csv(run_dir.join(ENDMEMBERS_FILE))
        .with_context(|| format!("loading endmembers from {}", run_dir.display()))?;
    let (mut a, rows, cols): (Abundances, _, _) = load_abundances(run_dir.join(ABUNDANCES_FILE))
        .with_context(|| format!("loading abundances from {}", run_dir.display()))?;
    let trace = load_trace(run_dir.join(TRACE_FILE))?;
    let truth = args.truth.as_deref().map(|t| load_truth(&resolve(t))).transpose()?;
    if let Some(t) = &truth {
        let al = align(&e, &t.endmembers)?;
        a = aligned_abundances(&a, &al)?;
        e = e.permuted(&al.perm)?;
    }

    let mut stage = Staging::open(&dir)?;
    let maps = a.to_maps(rows, cols)?;
    for (k, map) in maps.axis_iter(Axis(0)).enumerate() {
        let (ppm, note) = gray_ppm(map);
        write_file(&mut stage, &map_file(k), &ppm)?;
        write_file(&mut stage, &scale_file(k), note.as_bytes())?;
    }
    let spectra = spectra_chart(&e, truth.as_ref().map(|t| &t.endmembers));
    write_file(&mut stage, ENDMEMBERS_SVG, spectra.as_bytes())?;
    write_convergence(&mut stage, &trace)?;
    stage.commit();
    Ok(dir)
}

fn write_convergence(stage: &mut Staging, trace: &RunTrace) -> Result<()> {
    let (series, y_label) = convergence_series(trace, "run");
    let svg = Chart {
        title: "Convergence",
        x_label: "iteration",
        y_label,
        series: vec![series],
    }
    .render();
    write_file(stage, CONVERGENCE_SVG, svg.as_bytes())
}
