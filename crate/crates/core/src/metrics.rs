//! Evaluation metrics: spectral angle (SAD), abundance RMSE, per-map PSNR,
//! reconstruction error, and the optimal endmember alignment they rely on.
//!
//! Everything is computed in `f64`; angles are radians.

use ndarray::{ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::cube::{AbundanceMatrix, EndmemberMatrix, SpectralCube};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Matching of estimated endmembers to ground-truth endmembers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alignment {
    /// `perm[k]` is the truth index matched to estimated endmember `k`.
    pub perm: Vec<usize>,
    /// Angle (radians) of each matched pair, indexed by estimated endmember.
    pub per_pair_sad: Vec<f64>,
}

impl Alignment {
    pub fn identity(p: usize) -> Self {
        Self {
            perm: (0..p).collect(),
            per_pair_sad: vec![0.0; p],
        }
    }

    pub fn mean_sad(&self) -> f64 {
        self.per_pair_sad.iter().sum::<f64>() / self.per_pair_sad.len() as f64
    }
}

/// Spectral angle between two vectors, in `[0, pi]`.
pub fn sad<T: Real>(e: ArrayView1<T>, e_hat: ArrayView1<T>) -> Result<f64> {
    if e.len() != e_hat.len() {
        return Err(Error::dim("spectral angle", e.len(), e_hat.len()));
    }
    let (mut dot, mut n1, mut n2) = (0.0, 0.0, 0.0);
    for (a, b) in e.iter().zip(e_hat.iter()) {
        let (a, b) = (a.as_f64(), b.as_f64());
        dot += a * b;
        n1 += a * a;
        n2 += b * b;
    }
    if n1 == 0.0 || n2 == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((dot / (n1.sqrt() * n2.sqrt())).clamp(-1.0, 1.0).acos())
}

/// Optimal one-to-one assignment minimizing the total spectral angle.
pub fn align<T: Real>(est: &EndmemberMatrix<T>, truth: &EndmemberMatrix<T>) -> Result<Alignment> {
    if est.count() != truth.count() {
        return Err(Error::dim("alignment endmember count", truth.count(), est.count()));
    }
    if est.bands() != truth.bands() {
        return Err(Error::dim("alignment bands", truth.bands(), est.bands()));
    }
    let p = est.count();
    let mut cost = vec![vec![0.0; p]; p];
    for (k, row) in cost.iter_mut().enumerate() {
        for (t, c) in row.iter_mut().enumerate() {
            *c = sad(truth.column(t), est.column(k))?;
        }
    }
    let perm = hungarian(&cost);
    let per_pair_sad = perm.iter().enumerate().map(|(k, &t)| cost[k][t]).collect();
    Ok(Alignment { perm, per_pair_sad })
}

/// Mean angle over aligned pairs.
pub fn mean_sad<T: Real>(est: &EndmemberMatrix<T>, truth: &EndmemberMatrix<T>, alignment: &Alignment) -> Result<f64> {
    if alignment.perm.len() != est.count() || est.count() != truth.count() {
        return Err(Error::dim("mean SAD", truth.count(), est.count()));
    }
    let total = alignment
        .perm
        .iter()
        .enumerate()
        .map(|(k, &t)| sad(truth.column(t), est.column(k)))
        .sum::<Result<f64>>()?;
    Ok(total / est.count() as f64)
}

/// Estimated abundances with rows moved into truth order.
pub fn aligned_abundances<T: Real>(a_est: &AbundanceMatrix<T>, alignment: &Alignment) -> Result<AbundanceMatrix<T>> {
    a_est.permuted(&alignment.perm)
}

fn same_shape<T: Real>(what: &'static str, a: ArrayView2<T>, b: ArrayView2<T>) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::dim(what, format!("{:?}", b.dim()), format!("{:?}", a.dim())));
    }
    Ok(())
}

/// `sqrt(sum (A - A_hat)^2 / (N P))`; rows must already be aligned.
pub fn rmse<T: Real>(a_est: &AbundanceMatrix<T>, a_truth: &AbundanceMatrix<T>) -> Result<f64> {
    same_shape("RMSE", a_est.data(), a_truth.data())?;
    let sq: f64 = a_est
        .data()
        .iter()
        .zip(a_truth.data().iter())
        .map(|(x, y)| (x.as_f64() - y.as_f64()).powi(2))
        .sum();
    Ok((sq / a_est.data().len() as f64).sqrt())
}

/// PSNR in dB, computed per abundance map with `MSE = sum_j (A - A_hat)^2 / N`
/// and `MAX` the largest truth value in that map, then averaged over maps.
/// A map with zero error contributes `+inf`, so an exact match returns `+inf`.
pub fn psnr<T: Real>(a_est: &AbundanceMatrix<T>, a_truth: &AbundanceMatrix<T>) -> Result<f64> {
    same_shape("PSNR", a_est.data(), a_truth.data())?;
    let n = a_truth.pixels() as f64;
    let mut total = 0.0;
    for (est, truth) in a_est.data().axis_iter(Axis(0)).zip(a_truth.data().axis_iter(Axis(0))) {
        let peak = truth.iter().fold(f64::NEG_INFINITY, |m, v| m.max(v.as_f64()));
        let mse = est
            .iter()
            .zip(truth.iter())
            .map(|(x, y)| (x.as_f64() - y.as_f64()).powi(2))
            .sum::<f64>()
            / n;
        total += if mse == 0.0 { f64::INFINITY } else { 10.0 * (peak * peak / mse).log10() };
    }
    Ok(total / a_truth.count() as f64)
}

/// Normalizer of the reconstruction error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReNormalizer {
    /// Divide by pixels times endmembers (the customary RE definition).
    #[default]
    PixelsTimesEndmembers,
    /// Divide by pixels times bands (a per-entry RMSE of the residual).
    PixelsTimesBands,
}

/// `sqrt(sum_i |r_i - (E a)_i|^2 / (N * k))` with `k` chosen by `norm`.
pub fn reconstruction_error<T: Real>(
    r: &SpectralCube<T>,
    e: &EndmemberMatrix<T>,
    a: &AbundanceMatrix<T>,
    norm: ReNormalizer,
) -> Result<f64> {
    if e.bands() != r.bands() {
        return Err(Error::dim("RE bands", r.bands(), e.bands()));
    }
    if e.count() != a.count() {
        return Err(Error::dim("RE endmember count", e.count(), a.count()));
    }
    if a.pixels() != r.pixels() {
        return Err(Error::dim("RE pixels", r.pixels(), a.pixels()));
    }
    let remix = e.data().dot(&a.data());
    let sq: f64 = r
        .data()
        .iter()
        .zip(remix.iter())
        .map(|(x, y)| (x.as_f64() - y.as_f64()).powi(2))
        .sum();
    let k = match norm {
        ReNormalizer::PixelsTimesEndmembers => e.count(),
        ReNormalizer::PixelsTimesBands => r.bands(),
    };
    Ok((sq / (r.pixels() * k) as f64).sqrt())
}

/// Table-row metrics of one estimate against ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub rmse: f64,
    pub sad_deg: f64,
    pub psnr_db: f64,
    /// Present when the observed cube was supplied.
    pub re: Option<f64>,
    pub alignment: Alignment,
}

/// Aligns, then computes RMSE, mean SAD (degrees), PSNR and optionally RE.
pub fn evaluate<T: Real>(
    est_e: &EndmemberMatrix<T>,
    est_a: &AbundanceMatrix<T>,
    truth_e: &EndmemberMatrix<T>,
    truth_a: &AbundanceMatrix<T>,
    cube: Option<&SpectralCube<T>>,
) -> Result<Evaluation> {
    let alignment = align(est_e, truth_e)?;
    let a = aligned_abundances(est_a, &alignment)?;
    let re = cube
        .map(|c| reconstruction_error(c, est_e, est_a, ReNormalizer::default()))
        .transpose()?;
    Ok(Evaluation {
        rmse: rmse(&a, truth_a)?,
        sad_deg: alignment.mean_sad().to_degrees(),
        psnr_db: psnr(&a, truth_a)?,
        re,
        alignment,
    })
}

/// Minimum-cost perfect matching on a square cost matrix (Kuhn–Munkres with
/// potentials). Returns `assignment[row] = col`.
fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut matched_row = vec![0usize; n + 1]; // column j -> row (1-based, 0 = free)
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        matched_row[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        if matched_row[j] > 0 {
            assignment[matched_row[j] - 1] = j - 1;
        }
    }
    assignment
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn sad_examples() {
        let e = array![1.0, 0.0];
        assert_eq!(sad(e.view(), e.view()).unwrap(), 0.0);
        let o = array![0.0, 1.0];
        assert!((sad(e.view(), o.view()).unwrap() - FRAC_PI_2).abs() < 1e-15);
        let v = array![0.3, 0.5, 0.1];
        let w = &v * 3.0;
        assert!(sad(v.view(), w.view()).unwrap() < 1e-7);
        assert!(matches!(sad(e.view(), array![0.0, 0.0].view()), Err(Error::ZeroNorm)));
    }

    #[test]
    fn sad_is_total_on_near_parallel_inputs() {
        let v = array![0.1, 0.2, 0.30000000000000004];
        let w = array![0.1, 0.2, 0.3];
        assert!(sad(v.view(), w.view()).unwrap().is_finite());
    }

    #[test]
    fn align_identity_and_swap() {
        let t = EndmemberMatrix::new(array![[1.0, 0.0, 0.2], [0.0, 1.0, 0.3], [0.5, 0.1, 1.0]]).unwrap();
        let a = align(&t, &t).unwrap();
        assert_eq!(a.perm, vec![0, 1, 2]);
        assert!(a.per_pair_sad.iter().all(|&s| s < 1e-7));

        let swapped = t.permuted(&[1, 0, 2]).unwrap();
        assert_eq!(align(&swapped, &t).unwrap().perm, vec![1, 0, 2]);
    }

    #[test]
    fn hungarian_beats_greedy() {
        // greedy on row 0 takes column 0 (cost 1) and forces row 1 onto cost 10
        let cost = vec![vec![1.0, 2.0], vec![1.5, 10.0]];
        assert_eq!(hungarian(&cost), vec![1, 0]);
    }

    #[test]
    fn rmse_examples() {
        let a = AbundanceMatrix::new(array![[0.2, 0.5], [0.8, 0.5]]).unwrap();
        assert_eq!(rmse(&a, &a).unwrap(), 0.0);
        let b = AbundanceMatrix::new(a.data().mapv(|v| v + 0.1)).unwrap();
        assert!((rmse(&b, &a).unwrap() - 0.1).abs() < 1e-15);
        let c = AbundanceMatrix::new(Array2::zeros((2, 3))).unwrap();
        assert!(matches!(rmse(&c, &a), Err(Error::Dimension { .. })));
    }

    #[test]
    fn psnr_examples() {
        let truth = AbundanceMatrix::new(array![[1.0, 0.0, 0.5], [0.0, 1.0, 0.5]]).unwrap();
        assert_eq!(psnr(&truth, &truth).unwrap(), f64::INFINITY);
        let off = AbundanceMatrix::new(truth.data().mapv(|v| v + 0.1)).unwrap();
        assert!((psnr(&off, &truth).unwrap() - 20.0).abs() < 1e-10);
        let off2 = AbundanceMatrix::new(truth.data().mapv(|v| v + 0.2)).unwrap();
        let drop = psnr(&off, &truth).unwrap() - psnr(&off2, &truth).unwrap();
        assert!((drop - 20.0 * 2f64.log10()).abs() < 1e-10);
    }

    #[test]
    fn reconstruction_error_examples() {
        let e = EndmemberMatrix::new(array![[1.0, 0.0], [0.0, 1.0], [0.5, 0.5]]).unwrap();
        let a = AbundanceMatrix::new(array![[0.3, 1.0], [0.7, 0.0]]).unwrap();
        let r = SpectralCube::new(1, 2, e.data().dot(&a.data())).unwrap();
        assert_eq!(reconstruction_error(&r, &e, &a, ReNormalizer::default()).unwrap(), 0.0);

        let shifted = SpectralCube::new(1, 2, r.data().mapv(|v| v + 0.2)).unwrap();
        let re1 = reconstruction_error(&shifted, &e, &a, ReNormalizer::PixelsTimesEndmembers).unwrap();
        let doubled = SpectralCube::new(1, 2, r.data().mapv(|v| v + 0.4)).unwrap();
        let re2 = reconstruction_error(&doubled, &e, &a, ReNormalizer::PixelsTimesEndmembers).unwrap();
        assert!((re2 - 2.0 * re1).abs() < 1e-14);
        // 6 squared residuals of 0.04 over N*P = 4 vs N*L = 6
        assert!((re1 - (0.24f64 / 4.0).sqrt()).abs() < 1e-14);
        let re_l = reconstruction_error(&shifted, &e, &a, ReNormalizer::PixelsTimesBands).unwrap();
        assert!((re_l - 0.2).abs() < 1e-14);
    }
}
