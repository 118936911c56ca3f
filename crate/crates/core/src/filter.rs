//! Small 2D filtering helpers shared by the scene generator and the denoisers.

use ndarray::{Array2, ArrayView2};

use crate::scalar::Real;

/// Half-sample symmetric reflection: `-1 -> 0`, `n -> n - 1`, periodic in `2n`.
#[inline]
pub(crate) fn reflect(i: isize, n: usize) -> usize {
    let period = 2 * n as isize;
    let m = i.rem_euclid(period);
    if m < n as isize {
        m as usize
    } else {
        (period - 1 - m) as usize
    }
}

/// Sampled Gaussian of std `s`, truncated at `ceil(3s)`, normalized to unit sum.
pub(crate) fn gaussian_kernel(s: f64) -> Vec<f64> {
    let radius = (3.0 * s).ceil().max(0.0) as isize;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|x| (-(x as f64).powi(2) / (2.0 * s * s)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

/// Separable convolution with an odd-length kernel, reflective boundary.
pub(crate) fn convolve_separable<T: Real>(img: ArrayView2<T>, kernel: &[f64]) -> Array2<T> {
    let (rows, cols) = img.dim();
    let radius = (kernel.len() / 2) as isize;
    let k: Vec<T> = kernel.iter().map(|&v| T::of(v)).collect();
    let mut tmp = Array2::<T>::zeros((rows, cols));
    for i in 0..rows {
        for j in 0..cols {
            let mut acc = T::zero();
            for (t, &w) in k.iter().enumerate() {
                let jj = reflect(j as isize + t as isize - radius, cols);
                acc += w * img[[i, jj]];
            }
            tmp[[i, j]] = acc;
        }
    }
    let mut out = Array2::<T>::zeros((rows, cols));
    for i in 0..rows {
        for (t, &w) in k.iter().enumerate() {
            let ii = reflect(i as isize + t as isize - radius, rows);
            for j in 0..cols {
                out[[i, j]] += w * tmp[[ii, j]];
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reflect_is_half_sample_symmetric() {
        let got: Vec<usize> = (-4..8).map(|i| reflect(i, 4)).collect();
        assert_eq!(got, vec![3, 2, 1, 0, 0, 1, 2, 3, 3, 2, 1, 0]);
        assert_eq!(reflect(-5, 1), 0);
    }

    #[test]
    fn kernel_is_normalized_and_symmetric() {
        let k = gaussian_kernel(1.5);
        assert_eq!(k.len(), 11);
        assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!(k[0], k[10]);
    }
}
