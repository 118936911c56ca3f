use std::path::PathBuf;

use anyhow::{ensure, Context, Result};
use clap::Args;
use pnmf_core::io::{load_abundances, load_cube, load_endmember_csv};
use pnmf_core::metrics::{evaluate, Evaluation};
use pnmf_core::{Abundances, Cube, Endmembers};

use crate::cmd::unmix::{load_truth, ABUNDANCES_FILE, ENDMEMBERS_FILE};
use crate::manifest::{RunManifest, MANIFEST_FILE};
use crate::output::resolve;
use crate::results::{append_row, method_for, ResultRow};

/// Score an unmixing run against ground truth.
#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    /// Output directory of `unmix`.
    #[arg(long)]
    pub run: PathBuf,
    /// Output directory of `synth`.
    #[arg(long)]
    pub truth: PathBuf,
    /// Observed cube; enables the reconstruction error.
    #[arg(long)]
    pub cube: Option<PathBuf>,
    /// Append the row to this results CSV.
    #[arg(long)]
    pub results: Option<PathBuf>,
    /// SNR label for the results row.
    #[arg(long)]
    pub snr: Option<f64>,
}

pub fn format_metric(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.6}")
    }
}

pub fn table(ev: &Evaluation) -> String {
    let re = ev.re.map(format_metric).unwrap_or_else(|| "-".into());
    format!(
        "rmse      {}\nsad_deg   {}\npsnr_db   {}\nre        {}\n",
        format_metric(ev.rmse),
        format_metric(ev.sad_deg),
        format_metric(ev.psnr_db),
        re
    )
}

pub fn run(args: &EvalArgs) -> Result<Evaluation> {
    let run_dir = resolve(&args.run);
    let truth = load_truth(&resolve(&args.truth))?;
    let e: Endmembers = load_endmember_csv(run_dir.join(ENDMEMBERS_FILE))
        .with_context(|| format!("loading endmembers from {}", run_dir.display()))?;
    let (a, rows, cols): (Abundances, _, _) = load_abundances(run_dir.join(ABUNDANCES_FILE))
        .with_context(|| format!("loading abundances from {}", run_dir.display()))?;
    ensure!(
        (rows, cols) == (truth.rows, truth.cols),
        "estimate is {rows}x{cols}, truth is {}x{}",
        truth.rows,
        truth.cols
    );
    let cube: Option<Cube> = match &args.cube {
        Some(p) => Some(load_cube(resolve(p)).with_context(|| format!("loading {}", p.display()))?),
        None => None,
    };
    let ev = evaluate(&e, &a, &truth.endmembers, &truth.abundances, cube.as_ref())?;
    print!("{}", table(&ev));

    if let Some(path) = &args.results {
        let manifest = RunManifest::read(&run_dir.join(MANIFEST_FILE))?;
        let cfg = manifest.unmix.context("run manifest has no solver config")?;
        let denoiser = cfg.denoiser.name();
        let row = ResultRow {
            method: method_for(denoiser, cfg.mu).into(),
            denoiser: denoiser.into(),
            snr_db: args.snr,
            seed: manifest.seed,
            rmse: ev.rmse,
            sad_deg: ev.sad_deg,
            psnr_db: ev.psnr_db,
            re: ev.re,
            iters: manifest.extra.get("iterations").and_then(|v| v.as_u64()).unwrap_or(0) as usize,
            seconds: manifest.extra.get("seconds").and_then(|v| v.as_f64()),
        };
        append_row(&row, &resolve(path))?;
    }
    Ok(ev)
}
