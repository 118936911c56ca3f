//! Initialization: vertex component analysis for endmembers and fully
//! constrained least squares for abundances.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::cube::{AbundanceMatrix, EndmemberMatrix, SpectralCube};
use crate::error::{Error, Result};
use crate::nnls::nnls_normal;
use crate::rng::GaussianStream;
use crate::scalar::Real;

/// Eigenvalues below this fraction of the largest count as numerically zero.
const RANK_TOL: f64 = 1e-12;

/// Subspace projection VCA used, chosen from the estimated SNR.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProjectionMode {
    /// High SNR: `p`-dimensional SVD subspace followed by a projective projection.
    Projective,
    /// Low SNR: `(p-1)`-dimensional PCA of mean-removed data plus a constant coordinate.
    Pca,
}

#[derive(Debug, Clone)]
pub struct VcaResult<T> {
    pub endmembers: EndmemberMatrix<T>,
    /// Pixel column chosen for each endmember.
    pub indices: Vec<usize>,
    pub projection_mode: ProjectionMode,
    /// SNR estimate (dB) that drove the mode choice.
    pub snr_estimate_db: f64,
}

/// SNR threshold (dB) above which VCA uses the projective projection.
pub fn vca_snr_threshold(p: usize) -> f64 {
    15.0 + 10.0 * (p as f64).log10()
}

/// Top-`k` eigenpairs of a symmetric matrix, largest first.
fn top_eigen(sym: &Array2<f64>, k: usize) -> (Vec<f64>, Array2<f64>) {
    let n = sym.nrows();
    let m = DMatrix::from_fn(n, n, |i, j| sym[[i, j]]);
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let values = order.iter().take(k).map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = Array2::from_shape_fn((n, k), |(r, c)| eig.eigenvectors[(r, order[c])]);
    // eigenvector signs are arbitrary and can flip under tiny perturbations
    // such as a different summation order; fix them so the entry of largest
    // magnitude is positive
    for mut col in vectors.axis_iter_mut(Axis(1)) {
        let lead = col.iter().copied().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
        if lead < 0.0 {
            col.mapv_inplace(|v| -v);
        }
    }
    (values, vectors)
}

fn numerical_rank(values: &[f64], largest: f64) -> usize {
    values.iter().filter(|&&v| v > RANK_TOL * largest.max(f64::MIN_POSITIVE)).count()
}

fn argmax_abs(v: &Array1<f64>) -> usize {
    // strict comparison keeps the lowest index on ties
    let mut best = (0, f64::NEG_INFINITY);
    for (j, &x) in v.iter().enumerate() {
        if x.abs() > best.1 {
            best = (j, x.abs());
        }
    }
    best.0
}

/// Vertex component analysis.
///
/// Estimates the signal subspace, projects the data (projective projection at
/// high SNR, PCA at low SNR), then repeatedly draws a random direction
/// orthogonal to the endmembers found so far and takes the pixel with the
/// largest absolute projection. Returned spectra are the selected pixels
/// after subspace projection, clamped at zero.
pub fn vca<T: Real>(cube: &SpectralCube<T>, p: usize, seed: u64) -> Result<VcaResult<T>> {
    let (l, n) = cube.data().dim();
    if p == 0 || p > l.min(n) {
        return Err(Error::Config(format!(
            "VCA needs 1 <= p <= min(bands, pixels) = {}, got {p}",
            l.min(n)
        )));
    }
    let y: Array2<f64> = cube.data().mapv(|v| v.as_f64());
    let mean = y.mean_axis(Axis(1)).expect("nonempty");
    let centered = &y - &mean.view().insert_axis(Axis(1));
    let cov = centered.dot(&centered.t()) / n as f64;
    let (pca_values, pca_vectors) = top_eigen(&cov, p);
    let x_pca = pca_vectors.t().dot(&centered);

    let power_y = y.iter().map(|v| v * v).sum::<f64>() / n as f64;
    let power_x = x_pca.iter().map(|v| v * v).sum::<f64>() / n as f64 + mean.dot(&mean);
    let snr = estimate_snr(power_y, power_x, p, l);

    if p == 1 {
        let idx = argmax_abs(&x_pca.row(0).to_owned());
        let spectrum = y.column(idx).mapv(|v| T::of(v.max(0.0)));
        return Ok(VcaResult {
            endmembers: EndmemberMatrix::new(spectrum.insert_axis(Axis(1)))?,
            indices: vec![idx],
            projection_mode: ProjectionMode::Pca,
            snr_estimate_db: snr,
        });
    }

    let (mode, projected, coords) = if snr < vca_snr_threshold(p) {
        let d = p - 1;
        let rank = numerical_rank(&pca_values[..d], pca_values[0]);
        if rank < d {
            return Err(Error::RankDeficient { needed: d, rank });
        }
        let basis = pca_vectors.slice(ndarray::s![.., ..d]);
        let x = x_pca.slice(ndarray::s![..d, ..]).to_owned();
        let projected = basis.dot(&x) + &mean.view().insert_axis(Axis(1));
        let c = x
            .axis_iter(Axis(1))
            .map(|col| col.dot(&col))
            .fold(0.0f64, f64::max)
            .sqrt();
        let mut coords = Array2::from_elem((p, n), c);
        coords.slice_mut(ndarray::s![..d, ..]).assign(&x);
        (ProjectionMode::Pca, projected, coords)
    } else {
        let corr = y.dot(&y.t()) / n as f64;
        let (values, basis) = top_eigen(&corr, p);
        let rank = numerical_rank(&values, values[0]);
        if rank < p {
            return Err(Error::RankDeficient { needed: p, rank });
        }
        let x = basis.t().dot(&y);
        let projected = basis.dot(&x);
        let u = x.mean_axis(Axis(1)).expect("nonempty");
        let mut coords = x;
        for mut col in coords.axis_iter_mut(Axis(1)) {
            let scale = col.dot(&u);
            col.mapv_inplace(|v| v / scale);
        }
        (ProjectionMode::Projective, projected, coords)
    };

    let indices = pick_vertices(coords.view(), p, seed)?;
    let spectra = projected.select(Axis(1), &indices).mapv(|v| T::of(v.max(0.0)));
    Ok(VcaResult {
        endmembers: EndmemberMatrix::new(spectra)?,
        indices,
        projection_mode: mode,
        snr_estimate_db: snr,
    })
}

fn estimate_snr(power_y: f64, power_x: f64, p: usize, l: usize) -> f64 {
    let noise = power_y - power_x;
    let signal = power_x - p as f64 / l as f64 * power_y;
    if noise <= 0.0 {
        f64::INFINITY
    } else if signal <= 0.0 {
        f64::NEG_INFINITY
    } else {
        10.0 * (signal / noise).log10()
    }
}

/// The vertex search on `p x N` projected coordinates.
fn pick_vertices(coords: ArrayView2<f64>, p: usize, seed: u64) -> Result<Vec<usize>> {
    let mut stream = GaussianStream::new(seed);
    let mut indices: Vec<usize> = Vec::with_capacity(p);
    // orthonormal basis of the span to avoid; starts as the last unit vector
    let mut basis: Vec<Array1<f64>> = vec![{
        let mut e = Array1::zeros(p);
        e[p - 1] = 1.0;
        e
    }];
    for i in 0..p {
        let w = Array1::from_shape_simple_fn(p, || stream.normal());
        let mut f = w;
        for q in &basis {
            let proj = q.dot(&f);
            f.scaled_add(-proj, q);
        }
        let norm = f.dot(&f).sqrt();
        if norm > 0.0 {
            f /= norm;
        }
        let v = f.dot(&coords);
        let idx = argmax_abs(&v);
        if indices.contains(&idx) {
            return Err(Error::RankDeficient { needed: p, rank: i });
        }
        indices.push(idx);

        if i == 0 {
            basis.clear();
        }
        let mut q = coords.column(idx).to_owned();
        for b in &basis {
            let proj = b.dot(&q);
            q.scaled_add(-proj, b);
        }
        let qn = q.dot(&q).sqrt();
        if qn > 0.0 {
            basis.push(q / qn);
        }
    }
    Ok(indices)
}

/// Fully constrained least squares: per pixel,
/// `argmin_a |[r; delta] - [E; delta 1^T] a|^2` subject to `a >= 0`.
///
/// The sum-to-one constraint is enforced softly through the `delta` row, so
/// column sums approach one as `delta` grows.
pub fn fcls<T: Real>(cube: &SpectralCube<T>, e: &EndmemberMatrix<T>, delta: f64) -> Result<AbundanceMatrix<T>> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::Config(format!("FCLS delta must be finite and > 0, got {delta}")));
    }
    if e.bands() != cube.bands() {
        return Err(Error::dim("FCLS bands", cube.bands(), e.bands()));
    }
    let p = e.count();
    let e64 = e.data().mapv(|v| v.as_f64());
    let d2 = delta * delta;
    let gram_nd = e64.t().dot(&e64) + d2;
    let gram = DMatrix::from_fn(p, p, |i, j| gram_nd[[i, j]]);
    let etr = e64.t().dot(&cube.data().mapv(|v| v.as_f64()));

    let mut out = Array2::<T>::zeros((p, cube.pixels()));
    for (j, col) in etr.axis_iter(Axis(1)).enumerate() {
        let rhs = DVector::from_fn(p, |k, _| col[k] + d2);
        let a = nnls_normal(&gram, &rhs);
        for k in 0..p {
            out[[k, j]] = T::of(a[k]);
        }
    }
    AbundanceMatrix::new(out)
}
