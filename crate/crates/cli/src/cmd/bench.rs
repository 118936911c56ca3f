use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use clap::Args;
use pnmf_core::engine::{run_unmixing, GroundTruth, UnmixConfig};
use pnmf_core::io::store_trace;
use pnmf_core::metrics::evaluate;
use pnmf_core::synth::{add_noise, generate_scene, noise_seed, SynthConfig};
use pnmf_core::RunTrace;
use serde::Serialize;

use crate::cmd::plot::convergence_series;
use crate::cmd::unmix::SolverArgs;
use crate::library;
use crate::manifest::{RunManifest, MANIFEST_FILE};
use crate::output::{resolve, Staging};
use crate::parse;
use crate::results::{method_for, write_rows, ResultRow, RESULTS_SCHEMA_VERSION};
use crate::svg::Chart;

pub const RESULTS_FILE: &str = "results.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const TRACES_DIR: &str = "traces";

pub fn trace_file(denoiser: &str, snr_db: f64, seed: u64) -> String {
    format!("{TRACES_DIR}/{denoiser}_{snr_db}dB_seed{seed}.csv")
}

pub fn convergence_file(snr_db: f64) -> String {
    format!("convergence_{snr_db}dB.svg")
}

/// SNR sweep over denoisers on synthetic scenes: synth, unmix and eval per
/// cell, with a results table, a mean/std summary and convergence plots.
#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long, value_parser = parse::seed)]
    pub seed: u64,
    #[arg(long, value_parser = parse::snr_list, default_value = "5,10,20,30")]
    pub snr: std::vec::Vec<f64>,
    #[arg(long, value_parser = parse::name_list, default_value = "none,gaussian,median,nlm,tv")]
    pub denoisers: std::vec::Vec<String>,
    /// Scenes per cell, with seeds `seed`, `seed+1`, ...
    #[arg(long, value_parser = parse::count, default_value = "1")]
    pub repeat: usize,
    #[arg(long, value_parser = parse::size, default_value = "64x64")]
    pub size: (usize, usize),
    #[arg(long, value_parser = parse::count, default_value = "4")]
    pub p: usize,
    #[arg(long, default_value_t = 4.0)]
    pub smoothness: f64,
    #[arg(long, default_value_t = 0.05)]
    pub pure_fraction: f64,
    /// Endmember library CSV; defaults to the built-in toy library.
    #[arg(long)]
    pub library: Option<PathBuf>,
    /// Solver flags as for `unmix`. Denoiser overrides take a kind prefix,
    /// e.g. `--denoiser-param nlm.h_factor=0.05`.
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(short, long)]
    pub output: PathBuf,
}

/// Overrides for one denoiser kind out of `kind.key=value` pairs.
pub fn params_for(kind: &str, all: &[(String, f64)]) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    for (key, value) in all {
        match key.split_once('.') {
            Some((k, rest)) if k == kind => out.push((rest.to_string(), *value)),
            Some(_) => {}
            None => bail!("bench denoiser parameters need a kind prefix, e.g. nlm.{key}"),
        }
    }
    Ok(out)
}

/// Mean and sample standard deviation of one metric over the runs of a cell.
fn mean_std(values: &[f64]) -> (f64, Option<f64>) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 || !mean.is_finite() {
        return (mean, None);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, Some(var.sqrt()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub method: String,
    pub denoiser: String,
    pub snr_db: f64,
    pub runs: usize,
    pub rmse_mean: f64,
    pub rmse_std: Option<f64>,
    pub sad_deg_mean: f64,
    pub sad_deg_std: Option<f64>,
    pub psnr_db_mean: f64,
    pub psnr_db_std: Option<f64>,
    pub re_mean: f64,
    pub re_std: Option<f64>,
    pub iters_mean: f64,
}

pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut cells: Vec<(String, String, f64)> = Vec::new();
    for r in rows {
        let key = (r.method.clone(), r.denoiser.clone(), r.snr_db.unwrap_or(f64::NAN));
        if !cells.iter().any(|c| c.0 == key.0 && c.1 == key.1 && c.2.to_bits() == key.2.to_bits()) {
            cells.push(key);
        }
    }
    cells
        .into_iter()
        .map(|(method, denoiser, snr)| {
            let runs: Vec<&ResultRow> = rows
                .iter()
                .filter(|r| r.method == method && r.denoiser == denoiser && r.snr_db.unwrap_or(f64::NAN).to_bits() == snr.to_bits())
                .collect();
            let col = |f: fn(&ResultRow) -> f64| mean_std(&runs.iter().map(|r| f(r)).collect::<Vec<_>>());
            let (rmse_mean, rmse_std) = col(|r| r.rmse);
            let (sad_deg_mean, sad_deg_std) = col(|r| r.sad_deg);
            let (psnr_db_mean, psnr_db_std) = col(|r| r.psnr_db);
            let (re_mean, re_std) = col(|r| r.re.unwrap_or(f64::NAN));
            let (iters_mean, _) = col(|r| r.iters as f64);
            SummaryRow {
                method,
                denoiser,
                snr_db: snr,
                runs: runs.len(),
                rmse_mean,
                rmse_std,
                sad_deg_mean,
                sad_deg_std,
                psnr_db_mean,
                psnr_db_std,
                re_mean,
                re_std,
                iters_mean,
            }
        })
        .collect()
}

pub struct BenchOutcome {
    pub dir: PathBuf,
    pub rows: Vec<ResultRow>,
}

pub fn run(args: &BenchArgs) -> Result<BenchOutcome> {
    ensure!(args.repeat >= 1, "--repeat must be at least 1");
    ensure!(!args.snr.is_empty(), "--snr needs at least one value");
    let lib = library::load(args.library.as_deref())?;
    ensure!(args.p <= lib.count(), "library has {} endmembers, {} requested", lib.count(), args.p);
    // the full iteration budget by default: the relative-change rule stops
    // low-SNR runs at the data-fit noise floor before the prior has acted
    let default_tol = 0.0;
    let mut configs: Vec<(String, UnmixConfig)> = Vec::new();
    for name in &args.denoisers {
        let params = params_for(name, &args.solver.denoiser_params)?;
        let mut cfg = args.solver.config_with(name, &params, args.seed, default_tol)?;
        if cfg.denoiser.name() == "none" {
            cfg.mu = 0.0;
        }
        configs.push((cfg.denoiser.name().to_string(), cfg));
    }

    let dir = resolve(&args.output);
    let mut stage = Staging::open(&dir)?;
    let seeds: Vec<u64> = (0..args.repeat as u64).map(|r| args.seed.wrapping_add(r)).collect();
    let mut rows = Vec::new();
    let mut first_traces: Vec<(f64, String, RunTrace)> = Vec::new();
    let mut synth_cfg = None;

    for &seed in &seeds {
        let cfg = SynthConfig {
            rows: args.size.0,
            cols: args.size.1,
            p: args.p,
            smoothness: args.smoothness,
            pure_pixel_fraction: args.pure_fraction,
            seed,
            snr_db: None,
            clamp_noisy: false,
        };
        let scene = generate_scene(&cfg, &lib).with_context(|| format!("generating scene for seed {seed}"))?;
        synth_cfg.get_or_insert(cfg);
        let truth = GroundTruth {
            endmembers: &scene.endmembers,
            abundances: &scene.abundances,
        };
        for &snr in &args.snr {
            let cube = add_noise(&scene.clean, snr, noise_seed(seed, snr))?;
            for (name, base) in &configs {
                let cfg = UnmixConfig { seed, ..base.clone() };
                let started = Instant::now();
                let out = run_unmixing(&cube, args.p, &cfg, Some(truth))
                    .with_context(|| format!("{name} at {snr} dB, seed {seed}"))?;
                let seconds = started.elapsed().as_secs_f64();
                let ev = evaluate(&out.state.e, &out.state.a, &scene.endmembers, &scene.abundances, Some(&cube))?;
                eprintln!(
                    "{name:>8} {snr:>5} dB seed {seed}: rmse {:.4} sad {:.3} deg psnr {:.2} dB, {} iterations",
                    ev.rmse, ev.sad_deg, ev.psnr_db, out.state.iter
                );
                store_trace(&out.state.trace, stage.file(&trace_file(name, snr, seed))?, args.solver.timing)?;
                rows.push(ResultRow {
                    method: method_for(name, cfg.mu).into(),
                    denoiser: name.clone(),
                    snr_db: Some(snr),
                    seed,
                    rmse: ev.rmse,
                    sad_deg: ev.sad_deg,
                    psnr_db: ev.psnr_db,
                    re: ev.re,
                    iters: out.state.iter,
                    seconds: args.solver.timing.then_some(seconds),
                });
                if seed == seeds[0] {
                    first_traces.push((snr, name.clone(), out.state.trace));
                }
            }
        }
    }
    // rows grouped by SNR, then denoiser, then seed
    rows.sort_by(|a, b| {
        let snr_pos = |r: &ResultRow| args.snr.iter().position(|s| Some(*s) == r.snr_db);
        let den_pos = |r: &ResultRow| configs.iter().position(|c| c.0 == r.denoiser);
        (snr_pos(a), den_pos(a), a.seed).cmp(&(snr_pos(b), den_pos(b), b.seed))
    });

    write_rows(&rows, &stage.file(RESULTS_FILE)?)?;
    let summary = summarize(&rows);
    let mut w = csv::Writer::from_path(stage.file(SUMMARY_FILE)?)?;
    for s in &summary {
        w.serialize(s)?;
    }
    w.flush()?;

    let mut manifest = RunManifest::new("bench", args.seed);
    manifest.endmembers = Some(args.p);
    manifest.synth = synth_cfg;
    if let Some(p) = &args.library {
        manifest.input("library", p);
    }
    for &snr in &args.snr {
        let series = first_traces
            .iter()
            .filter(|t| t.0 == snr)
            .map(|t| convergence_series(&t.2, &t.1))
            .collect::<Vec<_>>();
        let y_label = series.first().map(|s| s.1).unwrap_or("RMSE");
        let title = format!("Convergence at {snr} dB (seed {})", seeds[0]);
        let svg = Chart {
            title: &title,
            x_label: "iteration",
            y_label,
            series: series.into_iter().map(|s| s.0).collect(),
        }
        .render();
        let name = convergence_file(snr);
        std::fs::write(stage.file(&name)?, svg)?;
        manifest.output(&format!("convergence_{snr}dB"), &name);
    }
    manifest.output("results", RESULTS_FILE);
    manifest.output("summary", SUMMARY_FILE);
    manifest.output("traces", TRACES_DIR);
    manifest.extra("results_schema", RESULTS_SCHEMA_VERSION)?;
    manifest.extra("snr_db", &args.snr)?;
    manifest.extra("seeds", &seeds)?;
    manifest.extra(
        "solvers",
        configs.iter().map(|(n, c)| (n.clone(), c.clone())).collect::<std::collections::BTreeMap<_, _>>(),
    )?;
    manifest.write(&stage.file(MANIFEST_FILE)?)?;
    stage.commit();
    Ok(BenchOutcome { dir, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefixed_params_reach_only_their_kind() {
        let all = vec![("nlm.h_factor".to_string(), 0.1), ("tv.iters".to_string(), 20.0)];
        assert_eq!(params_for("nlm", &all).unwrap(), vec![("h_factor".to_string(), 0.1)]);
        assert!(params_for("median", &all).unwrap().is_empty());
        assert!(params_for("nlm", &[("h_factor".to_string(), 0.1)]).is_err());
    }

    #[test]
    fn summary_uses_sample_std() {
        let row = |seed, rmse| ResultRow {
            method: "nmf".into(),
            denoiser: "none".into(),
            snr_db: Some(5.0),
            seed,
            rmse,
            sad_deg: 1.0,
            psnr_db: 20.0,
            re: Some(0.1),
            iters: 10,
            seconds: None,
        };
        let s = summarize(&[row(0, 1.0), row(1, 3.0)]);
        assert_eq!(s.len(), 1);
        assert_eq!((s[0].runs, s[0].rmse_mean), (2, 2.0));
        assert!((s[0].rmse_std.unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(s[0].sad_deg_std, Some(0.0));
        assert_eq!(summarize(&[row(0, 1.0)])[0].rmse_std, None);
    }
}
