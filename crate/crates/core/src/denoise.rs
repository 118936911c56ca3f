//! Plug-in priors: denoisers applied to the stack of abundance maps at the
//! equivalent noise level `sigma = sqrt(mu / lambda)`.
//!
//! Every shipped kind works band by band on 2D maps with reflective
//! boundaries, is deterministic, and is the exact identity at `sigma = 0`.
//! New kinds plug into the engine by implementing [`Denoiser`].

use std::fmt;

use ndarray::{Array2, Array3, ArrayView2, ArrayView3, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::{convolve_separable, gaussian_kernel, reflect};
use crate::scalar::Real;

/// A stack of `P` maps (`P x rows x cols`) and the noise level to remove.
#[derive(Debug, Clone, Copy)]
pub struct DenoiseRequest<'a, T> {
    maps: ArrayView3<'a, T>,
    sigma: f64,
}

impl<'a, T: Real> DenoiseRequest<'a, T> {
    pub fn new(maps: ArrayView3<'a, T>, sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::Denoiser(format!("sigma must be finite and >= 0, got {sigma}")));
        }
        if let Some(index) = maps.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "denoiser input",
                index,
            });
        }
        Ok(Self { maps, sigma })
    }

    pub fn maps(&self) -> ArrayView3<'a, T> {
        self.maps
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// Anything that can stand in for the learnt prior.
pub trait Denoiser<T: Real> {
    /// Returns a stack of the same shape as the request.
    fn denoise(&self, request: &DenoiseRequest<'_, T>) -> Result<Array3<T>>;
}

/// Configuration of a shipped denoiser. Strength knobs are coupled to sigma.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DenoiserSpec {
    Identity,
    /// Gaussian blur with std `max(0.5, c_g * sigma * rows / reference_rows)` pixels.
    Gaussian { c_g: f64, reference_rows: f64 },
    /// Median over a `window x window` neighbourhood.
    Median { window: usize },
    /// Non-local means with `patch x patch` patches, a `(2 search + 1)^2`
    /// search window, filtering parameter `h = h_factor * sigma` and
    /// `offset * 2 sigma^2` subtracted from patch distances (`offset = 1` is
    /// the textbook noise correction).
    Nlm {
        patch: usize,
        search: usize,
        h_factor: f64,
        offset: f64,
    },
    /// Isotropic TV (ROF) with weight `c_tv * sigma`, solved by Chambolle's
    /// dual projection for `iters` iterations.
    Tv { c_tv: f64, iters: usize },
}

impl Default for DenoiserSpec {
    fn default() -> Self {
        Self::nlm()
    }
}

impl DenoiserSpec {
    pub fn gaussian() -> Self {
        Self::Gaussian {
            c_g: 5.0,
            reference_rows: 64.0,
        }
    }

    pub fn median() -> Self {
        Self::Median { window: 3 }
    }

    /// Defaults tuned for the prior step at the default `lambda` and `mu`:
    /// there every iteration re-applies the denoiser, so only a light touch
    /// per call avoids washing the maps out (see the README).
    pub fn nlm() -> Self {
        Self::Nlm {
            patch: 3,
            search: 3,
            h_factor: 0.05,
            offset: 0.0,
        }
    }

    pub fn tv() -> Self {
        Self::Tv { c_tv: 5e-4, iters: 50 }
    }

    /// Short name used on the command line and in result tables.
    pub fn name(&self) -> &'static str {
        match self {
            Self::Identity => "none",
            Self::Gaussian { .. } => "gaussian",
            Self::Median { .. } => "median",
            Self::Nlm { .. } => "nlm",
            Self::Tv { .. } => "tv",
        }
    }

    /// Builds a spec from a kind name and `key=value` overrides.
    pub fn from_parts(kind: &str, params: &[(String, f64)]) -> Result<Self> {
        let mut spec = match kind {
            "none" | "identity" => Self::Identity,
            "gaussian" => Self::gaussian(),
            "median" => Self::median(),
            "nlm" => Self::nlm(),
            "tv" => Self::tv(),
            other => return Err(Error::Config(format!("unknown denoiser kind {other:?}"))),
        };
        for (key, value) in params {
            spec.set(key, *value)?;
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        let count = |v: f64| -> Result<usize> {
            if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                Ok(v as usize)
            } else {
                Err(Error::Config(format!("{key} must be a nonnegative integer, got {v}")))
            }
        };
        match (self, key) {
            (Self::Gaussian { c_g, .. }, "c_g") => *c_g = value,
            (Self::Gaussian { reference_rows, .. }, "reference_rows") => *reference_rows = value,
            (Self::Median { window }, "window") => *window = count(value)?,
            (Self::Nlm { patch, .. }, "patch") => *patch = count(value)?,
            (Self::Nlm { search, .. }, "search") => *search = count(value)?,
            (Self::Nlm { h_factor, .. }, "h_factor") => *h_factor = value,
            (Self::Nlm { offset, .. }, "offset") => *offset = value,
            (Self::Tv { c_tv, .. }, "c_tv") => *c_tv = value,
            (Self::Tv { iters, .. }, "iters") => *iters = count(value)?,
            (spec, _) => {
                return Err(Error::Config(format!(
                    "denoiser {} has no parameter {key:?}",
                    spec.name()
                )))
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        match *self {
            Self::Identity => Ok(()),
            Self::Gaussian { c_g, reference_rows } => {
                if !(c_g.is_finite() && c_g >= 0.0) {
                    return bad(format!("gaussian c_g must be >= 0, got {c_g}"));
                }
                if !(reference_rows.is_finite() && reference_rows > 0.0) {
                    return bad(format!("gaussian reference_rows must be > 0, got {reference_rows}"));
                }
                Ok(())
            }
            Self::Median { window } => {
                if window == 0 || window % 2 == 0 {
                    return bad(format!("median window must be odd and positive, got {window}"));
                }
                Ok(())
            }
            Self::Nlm {
                patch,
                search: _,
                h_factor,
                offset,
            } => {
                if patch == 0 || patch % 2 == 0 {
                    return bad(format!("nlm patch must be odd and positive, got {patch}"));
                }
                if !(h_factor.is_finite() && h_factor > 0.0) {
                    return bad(format!("nlm h_factor must be > 0, got {h_factor}"));
                }
                if !(offset.is_finite() && offset >= 0.0) {
                    return bad(format!("nlm offset must be >= 0, got {offset}"));
                }
                Ok(())
            }
            Self::Tv { c_tv, iters: _ } => {
                if !(c_tv.is_finite() && c_tv >= 0.0) {
                    return bad(format!("tv c_tv must be >= 0, got {c_tv}"));
                }
                Ok(())
            }
        }
    }

    fn denoise_band<T: Real>(&self, band: ArrayView2<T>, sigma: f64) -> Array2<T> {
        match *self {
            Self::Identity => band.to_owned(),
            Self::Gaussian { c_g, reference_rows } => {
                let s = (c_g * sigma * band.nrows() as f64 / reference_rows).max(0.5);
                gaussian_blur(band, s)
            }
            Self::Median { window } => median_filter(band, window),
            Self::Nlm {
                patch,
                search,
                h_factor,
                offset,
            } => nlm(band, offset.sqrt() * sigma, patch, search, h_factor * sigma),
            Self::Tv { c_tv, iters } => tv_chambolle(band, c_tv * sigma, iters),
        }
    }
}

impl fmt::Display for DenoiserSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl<T: Real> Denoiser<T> for DenoiserSpec {
    fn denoise(&self, request: &DenoiseRequest<'_, T>) -> Result<Array3<T>> {
        self.validate()?;
        let maps = request.maps();
        if request.sigma() == 0.0 {
            return Ok(maps.to_owned());
        }
        let mut out = Array3::zeros(maps.raw_dim());
        for (src, mut dst) in maps.axis_iter(Axis(0)).zip(out.axis_iter_mut(Axis(0))) {
            dst.assign(&self.denoise_band(src, request.sigma()));
        }
        Ok(out)
    }
}

/// Convenience wrapper: validates the request and runs `spec`.
pub fn denoise<T: Real>(spec: &DenoiserSpec, maps: ArrayView3<T>, sigma: f64) -> Result<Array3<T>> {
    spec.denoise(&DenoiseRequest::new(maps, sigma)?)
}

/// Gaussian blur with std `s` pixels, truncated at `3s`.
pub fn gaussian_blur<T: Real>(img: ArrayView2<T>, s: f64) -> Array2<T> {
    convolve_separable(img, &gaussian_kernel(s))
}

pub fn median_filter<T: Real>(img: ArrayView2<T>, window: usize) -> Array2<T> {
    let (rows, cols) = img.dim();
    let r = (window / 2) as isize;
    let mut buf: Vec<T> = Vec::with_capacity(window * window);
    let mid = window * window / 2;
    Array2::from_shape_fn((rows, cols), |(i, j)| {
        buf.clear();
        for di in -r..=r {
            let ii = reflect(i as isize + di, rows);
            for dj in -r..=r {
                buf.push(img[[ii, reflect(j as isize + dj, cols)]]);
            }
        }
        let (_, m, _) = buf.select_nth_unstable_by(mid, |a, b| a.partial_cmp(b).expect("finite"));
        *m
    })
}

/// Non-local means on one map.
///
/// Weights are `exp(-max(d2 - 2 sigma^2, 0) / h^2)` with `d2` the mean
/// squared difference of `patch x patch` neighbourhoods; the centre pixel
/// takes the largest weight of the other candidates.
pub fn nlm<T: Real>(img: ArrayView2<T>, sigma: f64, patch: usize, search: usize, h: f64) -> Array2<T> {
    let (rows, cols) = img.dim();
    let pr = patch / 2;
    let pad = search + pr;
    let (prow, pcol) = (rows + 2 * pad, cols + 2 * pad);
    let padded = Array2::from_shape_fn((prow, pcol), |(i, j)| {
        img[[
            reflect(i as isize - pad as isize, rows),
            reflect(j as isize - pad as isize, cols),
        ]]
        .as_f64()
    });

    let (erow, ecol) = (rows + 2 * pr, cols + 2 * pr);
    let noise_floor = 2.0 * sigma * sigma;
    let inv_h2 = 1.0 / (h * h);
    let inv_area = 1.0 / (patch * patch) as f64;
    let mut diff = Array2::<f64>::zeros((erow, ecol));
    let mut rowsum = Array2::<f64>::zeros((erow, cols));
    let mut acc = Array2::<f64>::zeros((rows, cols));
    let mut wsum = Array2::<f64>::zeros((rows, cols));
    let mut wmax = Array2::<f64>::zeros((rows, cols));
    let s = search as isize;
    let base = search; // padded index of extended-region origin

    for dy in -s..=s {
        for dx in -s..=s {
            if dy == 0 && dx == 0 {
                continue;
            }
            for i in 0..erow {
                let a = base + i;
                let b = (a as isize + dy) as usize;
                for j in 0..ecol {
                    let c = base + j;
                    let d = padded[[a, c]] - padded[[b, (c as isize + dx) as usize]];
                    diff[[i, j]] = d * d;
                }
            }
            for i in 0..erow {
                let mut run: f64 = (0..patch).map(|t| diff[[i, t]]).sum();
                rowsum[[i, 0]] = run;
                for j in 1..cols {
                    run += diff[[i, j + patch - 1]] - diff[[i, j - 1]];
                    rowsum[[i, j]] = run;
                }
            }
            for j in 0..cols {
                let mut run: f64 = (0..patch).map(|t| rowsum[[t, j]]).sum();
                for i in 0..rows {
                    if i > 0 {
                        run += rowsum[[i + patch - 1, j]] - rowsum[[i - 1, j]];
                    }
                    let excess = run * inv_area - noise_floor;
                    let w = if excess > 0.0 { (-excess * inv_h2).exp() } else { 1.0 };
                    let v = padded[[(pad as isize + i as isize + dy) as usize, (pad as isize + j as isize + dx) as usize]];
                    acc[[i, j]] += w * v;
                    wsum[[i, j]] += w;
                    if w > wmax[[i, j]] {
                        wmax[[i, j]] = w;
                    }
                }
            }
        }
    }

    Array2::from_shape_fn((rows, cols), |(i, j)| {
        let den = wsum[[i, j]] + wmax[[i, j]];
        if den > 0.0 {
            T::of((acc[[i, j]] + wmax[[i, j]] * img[[i, j]].as_f64()) / den)
        } else {
            img[[i, j]]
        }
    })
}

/// `min_x 0.5 |x - y|^2 + weight * TV(x)` by Chambolle's projection, step 1/4.
pub fn tv_chambolle<T: Real>(img: ArrayView2<T>, weight: f64, iters: usize) -> Array2<T> {
    let (rows, cols) = img.dim();
    let y = img.mapv(|v| v.as_f64());
    if weight <= 0.0 || iters == 0 {
        return img.to_owned();
    }
    let tau = 0.25;
    let step = tau / weight;
    let mut px = Array2::<f64>::zeros((rows, cols));
    let mut py = Array2::<f64>::zeros((rows, cols));
    let mut x = y.clone();
    for _ in 0..iters {
        let div = divergence(&px, &py);
        ndarray::Zip::from(&mut x).and(&y).and(&div).for_each(|x, &y, &d| *x = y - weight * d);
        for i in 0..rows {
            for j in 0..cols {
                let gx = if i + 1 < rows { x[[i + 1, j]] - x[[i, j]] } else { 0.0 };
                let gy = if j + 1 < cols { x[[i, j + 1]] - x[[i, j]] } else { 0.0 };
                let norm = 1.0 + step * (gx * gx + gy * gy).sqrt();
                px[[i, j]] = (px[[i, j]] - step * gx) / norm;
                py[[i, j]] = (py[[i, j]] - step * gy) / norm;
            }
        }
    }
    let div = divergence(&px, &py);
    Array2::from_shape_fn((rows, cols), |(i, j)| T::of(y[[i, j]] - weight * div[[i, j]]))
}

/// Negative adjoint of the forward-difference gradient (Neumann boundary).
fn divergence(px: &Array2<f64>, py: &Array2<f64>) -> Array2<f64> {
    let (rows, cols) = px.dim();
    Array2::from_shape_fn((rows, cols), |(i, j)| {
        let dx = if rows == 1 {
            0.0
        } else if i == 0 {
            px[[i, j]]
        } else if i + 1 == rows {
            -px[[i - 1, j]]
        } else {
            px[[i, j]] - px[[i - 1, j]]
        };
        let dy = if cols == 1 {
            0.0
        } else if j == 0 {
            py[[i, j]]
        } else if j + 1 == cols {
            -py[[i, j - 1]]
        } else {
            py[[i, j]] - py[[i, j - 1]]
        };
        dx + dy
    })
}
