//! Synthetic linear-mixture scenes: Gaussian-random-field abundances mixed
//! with an endmember library, with optional white Gaussian noise at a target SNR.

use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::cube::{AbundanceMatrix, EndmemberMatrix, SpectralCube};
use crate::error::{Error, Result};
use crate::filter::{convolve_separable, gaussian_kernel};
use crate::rng::{derive_seed, GaussianStream};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub rows: usize,
    pub cols: usize,
    /// Number of endmembers.
    pub p: usize,
    /// Std (pixels) of the Gaussian kernel that correlates each random field.
    pub smoothness: f64,
    /// Fraction of pixels snapped to pure (unit-vector) abundances.
    pub pure_pixel_fraction: f64,
    pub seed: u64,
    /// Target SNR in dB; `None` for a noiseless scene.
    pub snr_db: Option<f64>,
    /// Clamp the noisy cube at zero instead of keeping negative samples.
    pub clamp_noisy: bool,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            rows: 64,
            cols: 64,
            p: 4,
            smoothness: 4.0,
            pure_pixel_fraction: 0.05,
            seed: 0,
            snr_db: None,
            clamp_noisy: false,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::Config(format!("scene size {}x{} must be positive", self.rows, self.cols)));
        }
        if self.p < 2 {
            return Err(Error::Config(format!("need at least 2 endmembers, got {}", self.p)));
        }
        if !(self.smoothness.is_finite() && self.smoothness > 0.0) {
            return Err(Error::Config(format!("smoothness must be > 0, got {}", self.smoothness)));
        }
        if !(0.0..=1.0).contains(&self.pure_pixel_fraction) {
            return Err(Error::Config(format!(
                "pure pixel fraction must lie in [0, 1], got {}",
                self.pure_pixel_fraction
            )));
        }
        if let Some(snr) = self.snr_db {
            if snr.is_nan() {
                return Err(Error::Config("SNR is NaN".into()));
            }
        }
        Ok(())
    }
}

/// Spatially smooth abundances on the probability simplex.
///
/// Each endmember gets an i.i.d. standard normal field convolved with a
/// Gaussian kernel (std `smoothness`, truncated at 3 std, reflective
/// boundary). The kernel is scaled to unit energy so the smoothed field keeps
/// unit marginal variance at every smoothness. The `p` fields are mapped per
/// pixel through a softmax, then the `ceil(fraction * N)` pixels with the
/// largest maximum abundance are snapped to the matching unit vector.
pub fn generate_abundances<T: Real>(cfg: &SynthConfig) -> Result<AbundanceMatrix<T>> {
    cfg.validate()?;
    let n = cfg.rows * cfg.cols;
    let mut kernel = gaussian_kernel(cfg.smoothness);
    let energy: f64 = kernel.iter().map(|w| w * w).sum::<f64>().sqrt();
    kernel.iter_mut().for_each(|w| *w /= energy);

    let mut stream = GaussianStream::new(cfg.seed);
    let mut fields = Array2::<f64>::zeros((cfg.p, n));
    for mut row in fields.axis_iter_mut(Axis(0)) {
        let white = Array2::from_shape_simple_fn((cfg.rows, cfg.cols), || stream.normal());
        let smooth = convolve_separable(white.view(), &kernel);
        row.iter_mut().zip(smooth.iter()).for_each(|(d, s)| *d = *s);
    }

    for mut col in fields.axis_iter_mut(Axis(1)) {
        let peak = col.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        col.mapv_inplace(|v| (v - peak).exp());
        let sum = col.sum();
        col.mapv_inplace(|v| v / sum);
    }

    let pure = (cfg.pure_pixel_fraction * n as f64).ceil() as usize;
    if pure > 0 {
        let mut order: Vec<(usize, f64, usize)> = fields
            .axis_iter(Axis(1))
            .enumerate()
            .map(|(j, c)| {
                let (k, v) = c
                    .iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |best, (k, &v)| if v > best.1 { (k, v) } else { best });
                (j, v, k)
            })
            .collect();
        order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        for &(j, _, k) in order.iter().take(pure.min(n)) {
            let mut col = fields.column_mut(j);
            col.fill(0.0);
            col[k] = 1.0;
        }
    }

    AbundanceMatrix::new_simplex(fields.mapv(T::of))
}

/// Noiseless linear mixture `R = E A`.
pub fn mix<T: Real>(
    e: &EndmemberMatrix<T>,
    a: &AbundanceMatrix<T>,
    rows: usize,
    cols: usize,
) -> Result<SpectralCube<T>> {
    if e.count() != a.count() {
        return Err(Error::dim("mix endmember count", e.count(), a.count()));
    }
    SpectralCube::new(rows, cols, e.data().dot(&a.data()))
}

/// Noise variance that puts a cube at `snr_db` relative to its mean signal power.
pub fn noise_variance<T: Real>(cube: &SpectralCube<T>, snr_db: f64) -> f64 {
    let power: f64 = cube.data().iter().map(|v| v.as_f64().powi(2)).sum::<f64>() / cube.data().len() as f64;
    power / 10f64.powf(snr_db / 10.0)
}

/// Adds i.i.d. zero-mean Gaussian noise with variance
/// `(|R|_F^2 / (L N)) / 10^(snr_db / 10)`. `snr_db = +inf` returns the cube unchanged.
pub fn add_noise<T: Real>(cube: &SpectralCube<T>, snr_db: f64, seed: u64) -> Result<SpectralCube<T>> {
    if snr_db.is_nan() {
        return Err(Error::Config("SNR is NaN".into()));
    }
    if cube.data().iter().all(|v| v.is_zero()) {
        return Err(Error::EmptyCube);
    }
    if snr_db == f64::INFINITY {
        return Ok(cube.clone());
    }
    let sigma = noise_variance(cube, snr_db).sqrt();
    let mut stream = GaussianStream::new(seed);
    let data = cube.data().mapv(|v| v + T::of(sigma * stream.normal()));
    SpectralCube::with_negatives(cube.rows(), cube.cols(), data)
}

/// Seed of the noise stream for a scene seed and SNR, independent of the
/// order in which SNRs are requested.
pub fn noise_seed(seed: u64, snr_db: f64) -> u64 {
    derive_seed(seed, snr_db.to_bits())
}

/// Measured SNR (dB) of `noisy` against `clean`.
pub fn empirical_snr_db<T: Real>(clean: &SpectralCube<T>, noisy: &SpectralCube<T>) -> f64 {
    let signal: f64 = clean.data().iter().map(|v| v.as_f64().powi(2)).sum();
    let noise: f64 = clean
        .data()
        .iter()
        .zip(noisy.data().iter())
        .map(|(c, n)| (n.as_f64() - c.as_f64()).powi(2))
        .sum();
    10.0 * (signal / noise).log10()
}

/// A generated scene with its ground truth.
#[derive(Debug, Clone)]
pub struct Scene<T> {
    pub endmembers: EndmemberMatrix<T>,
    pub abundances: AbundanceMatrix<T>,
    pub clean: SpectralCube<T>,
    /// Present when the config requested an SNR.
    pub noisy: Option<SpectralCube<T>>,
}

impl<T: Real> Scene<T> {
    /// The cube an unmixer should see: noisy when available, else clean.
    pub fn observed(&self) -> &SpectralCube<T> {
        self.noisy.as_ref().unwrap_or(&self.clean)
    }
}

/// Abundances, mixture and (optionally) noise for a config and library.
/// Uses the first `cfg.p` columns of `library`.
pub fn generate_scene<T: Real>(cfg: &SynthConfig, library: &EndmemberMatrix<T>) -> Result<Scene<T>> {
    cfg.validate()?;
    if library.count() < cfg.p {
        return Err(Error::dim("endmember library size", format!(">= {}", cfg.p), library.count()));
    }
    let cols: Vec<usize> = (0..cfg.p).collect();
    let endmembers = EndmemberMatrix::new(library.data().select(Axis(1), &cols))?;
    let abundances = generate_abundances(cfg)?;
    let clean = mix(&endmembers, &abundances, cfg.rows, cfg.cols)?;
    let noisy = match cfg.snr_db {
        Some(snr) => {
            let noisy = add_noise(&clean, snr, noise_seed(cfg.seed, snr))?;
            Some(if cfg.clamp_noisy { noisy.clamp_nonnegative() } else { noisy })
        }
        None => None,
    };
    Ok(Scene {
        endmembers,
        abundances,
        clean,
        noisy,
    })
}
