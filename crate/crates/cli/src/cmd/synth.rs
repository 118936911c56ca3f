use std::path::PathBuf;

use anyhow::{ensure, Context, Result};
use clap::Args;
use pnmf_core::io::{store_abundances, store_cube, store_endmember_csv};
use pnmf_core::synth::{add_noise, generate_scene, noise_seed, SynthConfig};

use crate::library;
use crate::manifest::{RunManifest, MANIFEST_FILE};
use crate::output::{resolve, Staging};
use crate::parse;

pub const CLEAN_FILE: &str = "clean.hsic";
pub const TRUTH_ENDMEMBERS_FILE: &str = "truth_endmembers.csv";
pub const TRUTH_ABUNDANCES_FILE: &str = "truth_abundances.hsic";

pub fn noisy_file(snr_db: f64) -> String {
    format!("noisy_{snr_db}dB.hsic")
}

/// Generate a synthetic scene: truth endmembers and abundances, the clean
/// mixture and one noisy cube per requested SNR.
#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    /// Scene size as ROWSxCOLS.
    #[arg(long, value_parser = parse::size, default_value = "64x64")]
    pub size: (usize, usize),
    /// Number of endmembers, taken from the front of the library.
    #[arg(long, value_parser = parse::count, default_value = "4")]
    pub p: usize,
    /// Comma-separated SNRs in dB; omit for a clean cube only.
    #[arg(long, value_parser = parse::snr_list)]
    pub snr: Option<std::vec::Vec<f64>>,
    #[arg(long, value_parser = parse::seed)]
    pub seed: u64,
    /// Std in pixels of the kernel that smooths the abundance fields.
    #[arg(long, default_value_t = 4.0)]
    pub smoothness: f64,
    #[arg(long, default_value_t = 0.05)]
    pub pure_fraction: f64,
    /// Endmember library CSV (bands x endmembers); defaults to the built-in toy library.
    #[arg(long)]
    pub library: Option<PathBuf>,
    /// Clamp noisy cubes at zero.
    #[arg(long)]
    pub clamp: bool,
    #[arg(short, long)]
    pub output: PathBuf,
}

pub fn run(args: &SynthArgs) -> Result<PathBuf> {
    let lib = library::load(args.library.as_deref())?;
    ensure!(
        args.p <= lib.count(),
        "library has {} endmembers, {} requested",
        lib.count(),
        args.p
    );
    let cfg = SynthConfig {
        rows: args.size.0,
        cols: args.size.1,
        p: args.p,
        smoothness: args.smoothness,
        pure_pixel_fraction: args.pure_fraction,
        seed: args.seed,
        snr_db: None,
        clamp_noisy: args.clamp,
    };
    let scene = generate_scene(&cfg, &lib).context("generating scene")?;

    let dir = resolve(&args.output);
    let mut stage = Staging::open(&dir)?;
    let mut manifest = RunManifest::new("synth", args.seed);
    manifest.endmembers = Some(args.p);
    manifest.synth = Some(cfg.clone());
    if let Some(p) = &args.library {
        manifest.input("library", p);
    }

    store_cube(&scene.clean, stage.file(CLEAN_FILE)?)?;
    manifest.output("clean", CLEAN_FILE);
    store_endmember_csv(&scene.endmembers, stage.file(TRUTH_ENDMEMBERS_FILE)?)?;
    manifest.output("truth_endmembers", TRUTH_ENDMEMBERS_FILE);
    store_abundances(&scene.abundances, cfg.rows, cfg.cols, stage.file(TRUTH_ABUNDANCES_FILE)?)?;
    manifest.output("truth_abundances", TRUTH_ABUNDANCES_FILE);

    let snrs = args.snr.clone().unwrap_or_default();
    for &snr in &snrs {
        let noisy = add_noise(&scene.clean, snr, noise_seed(args.seed, snr))?;
        let noisy = if args.clamp { noisy.clamp_nonnegative() } else { noisy };
        let name = noisy_file(snr);
        store_cube(&noisy, stage.file(&name)?)?;
        manifest.output(&format!("noisy_{snr}dB"), &name);
    }
    manifest.extra("snr_db", &snrs)?;
    manifest.write(&stage.file(MANIFEST_FILE)?)?;
    stage.commit();
    Ok(dir)
}
