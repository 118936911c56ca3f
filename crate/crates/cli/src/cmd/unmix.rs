use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use clap::Args;
use ndarray::Axis;
use pnmf_core::cube::{apply_band_mask, BandMask};
use pnmf_core::engine::{run_unmixing, GroundTruth, UnmixConfig};
use pnmf_core::io::{load_abundances, load_cube, load_endmember_csv, store_abundances, store_endmember_csv, store_trace};
use pnmf_core::{Abundances, Cube, DenoiserSpec, Endmembers};

use crate::cmd::synth::{TRUTH_ABUNDANCES_FILE, TRUTH_ENDMEMBERS_FILE};
use crate::manifest::{RunManifest, MANIFEST_FILE};
use crate::output::{resolve, Staging};
use crate::parse;

pub const ENDMEMBERS_FILE: &str = "endmembers.csv";
pub const ABUNDANCES_FILE: &str = "abundances.hsic";
pub const TRACE_FILE: &str = "trace.csv";

/// Solver settings shared by `unmix` and `bench`.
#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Weight of the l2,1 row-sparsity term.
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    /// Penalty tying the abundances to their denoised copy.
    #[arg(long, default_value_t = 3e4)]
    pub lambda: f64,
    /// Prior strength; 0 gives the plain l2,1-regularized NMF baseline.
    #[arg(long, default_value_t = 500.0)]
    pub mu: f64,
    /// Weight of the sum-to-one augmentation row.
    #[arg(long, default_value_t = 10.0)]
    pub delta: f64,
    #[arg(long, value_parser = parse::count, default_value = "300")]
    pub max_iters: usize,
    /// Stop after this relative objective change holds for 5 iterations
    /// [default: 1e-5 for unmix, 0 (run all iterations) for bench].
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long, default_value_t = 1e-12)]
    pub eps: f64,
    /// Record wall time in traces and result tables (makes outputs differ between runs).
    #[arg(long)]
    pub timing: bool,
    /// Denoiser parameter override `key=value`, repeatable; bench takes `kind.key=value`.
    #[arg(long = "denoiser-param", value_parser = parse::key_value)]
    pub denoiser_params: Vec<(String, f64)>,
}

impl SolverArgs {
    pub fn config(&self, denoiser: &str, seed: u64, default_rel_tol: f64) -> Result<UnmixConfig> {
        self.config_with(denoiser, &self.denoiser_params, seed, default_rel_tol)
    }

    /// Like [`SolverArgs::config`] with explicit denoiser overrides.
    pub fn config_with(
        &self,
        denoiser: &str,
        params: &[(String, f64)],
        seed: u64,
        default_rel_tol: f64,
    ) -> Result<UnmixConfig> {
        let denoiser = DenoiserSpec::from_parts(denoiser, params)?;
        let cfg = UnmixConfig {
            alpha: self.alpha,
            lambda: self.lambda,
            mu: self.mu,
            delta: self.delta,
            max_iters: self.max_iters,
            rel_tol: self.rel_tol.unwrap_or(default_rel_tol),
            denoiser,
            eps_guard: self.eps,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Unmix a cube: VCA + FCLS initialization, then the alternating updates.
#[derive(Debug, Clone, Args)]
pub struct UnmixArgs {
    /// Input cube (HSIC).
    #[arg(short, long)]
    pub input: PathBuf,
    /// Number of endmembers.
    #[arg(long, value_parser = parse::count)]
    pub p: usize,
    /// Denoiser: none, gaussian, median, nlm or tv.
    #[arg(long, default_value = "nlm")]
    pub denoiser: String,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, value_parser = parse::seed, default_value = "0")]
    pub seed: u64,
    /// Band indices to drop before unmixing, e.g. `0-3,100,150-160`.
    #[arg(long, value_parser = parse::index_list)]
    pub drop_bands: Option<std::vec::Vec<usize>>,
    /// Directory from `synth`; enables the RMSE column of the trace.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(short, long)]
    pub output: PathBuf,
}

pub struct Truth {
    pub endmembers: Endmembers,
    pub abundances: Abundances,
    pub rows: usize,
    pub cols: usize,
}

pub fn load_truth(dir: &Path) -> Result<Truth> {
    let endmembers = load_endmember_csv(dir.join(TRUTH_ENDMEMBERS_FILE))
        .with_context(|| format!("loading truth endmembers from {}", dir.display()))?;
    let (abundances, rows, cols) = load_abundances(dir.join(TRUTH_ABUNDANCES_FILE))
        .with_context(|| format!("loading truth abundances from {}", dir.display()))?;
    Ok(Truth {
        endmembers,
        abundances,
        rows,
        cols,
    })
}

pub fn run(args: &UnmixArgs) -> Result<PathBuf> {
    let cfg = args.solver.config(&args.denoiser, args.seed, UnmixConfig::default().rel_tol)?;
    let mut cube: Cube = load_cube(&args.input).with_context(|| format!("loading {}", args.input.display()))?;
    let mask = match &args.drop_bands {
        Some(drop) => {
            let mask = BandMask::dropping(cube.bands(), drop)?;
            cube = apply_band_mask(&cube, &mask)?;
            Some(mask)
        }
        None => None,
    };
    let truth = match &args.truth {
        Some(dir) => {
            let mut t = load_truth(dir)?;
            if let Some(mask) = &mask {
                let kept: Vec<usize> = (0..mask.len()).filter(|&b| mask.keep()[b]).collect();
                t.endmembers = Endmembers::new(t.endmembers.data().select(Axis(0), &kept))?;
            }
            anyhow::ensure!(
                (t.rows, t.cols) == (cube.rows(), cube.cols()),
                "truth is {}x{}, cube is {}x{}",
                t.rows,
                t.cols,
                cube.rows(),
                cube.cols()
            );
            Some(t)
        }
        None => None,
    };
    let gt = truth.as_ref().map(|t| GroundTruth {
        endmembers: &t.endmembers,
        abundances: &t.abundances,
    });

    let started = Instant::now();
    let out = run_unmixing(&cube, args.p, &cfg, gt).context("unmixing failed")?;
    let seconds = started.elapsed().as_secs_f64();

    let dir = resolve(&args.output);
    let mut stage = Staging::open(&dir)?;
    let mut manifest = RunManifest::new("unmix", args.seed);
    manifest.endmembers = Some(args.p);
    manifest.input("cube", &args.input);
    if let Some(t) = &args.truth {
        manifest.input("truth", t);
    }
    if let Some(drop) = &args.drop_bands {
        manifest.extra("drop_bands", drop)?;
    }
    store_endmember_csv(&out.state.e, stage.file(ENDMEMBERS_FILE)?)?;
    manifest.output("endmembers", ENDMEMBERS_FILE);
    store_abundances(&out.state.a, cube.rows(), cube.cols(), stage.file(ABUNDANCES_FILE)?)?;
    manifest.output("abundances", ABUNDANCES_FILE);
    store_trace(&out.state.trace, stage.file(TRACE_FILE)?, args.solver.timing)?;
    manifest.output("trace", TRACE_FILE);
    manifest.extra("iterations", out.state.iter)?;
    manifest.extra("stop", out.stop)?;
    manifest.extra("vca_indices", &out.vca_indices)?;
    if args.solver.timing {
        manifest.extra("seconds", seconds)?;
    }
    manifest.unmix = Some(cfg);
    manifest.write(&stage.file(MANIFEST_FILE)?)?;
    stage.commit();
    Ok(dir)
}
