//! Domain types for observed cubes, endmember spectra and abundance maps,
//! plus the matrix/image-stack reshaping used at the denoiser boundary.
//!
//! Matrices are stored column-per-pixel: a cube is `L x N`, abundances are
//! `P x N`, and pixel `j` sits at spatial position `(j / cols, j % cols)`.

use ndarray::{Array2, Array3, ArrayView1, ArrayView2, ArrayView3, Axis};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Tolerance on abundance column sums for matrices flagged as simplex.
pub const SIMPLEX_TOL: f64 = 1e-6;

fn check_finite<T: Real>(what: &'static str, data: ArrayView2<T>) -> Result<()> {
    match data.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { what, index }),
        None => Ok(()),
    }
}

fn check_nonnegative<T: Real>(what: &'static str, data: ArrayView2<T>) -> Result<()> {
    for ((row, col), &v) in data.indexed_iter() {
        if v < T::zero() {
            return Err(Error::Negative {
                what,
                row,
                col,
                value: v.as_f64(),
            });
        }
    }
    Ok(())
}

/// Observed hyperspectral image `R` (`bands x pixels`).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCube<T> {
    rows: usize,
    cols: usize,
    data: Array2<T>,
    allow_negative: bool,
}

impl<T: Real> SpectralCube<T> {
    /// Clean cube: every entry must be finite and nonnegative.
    pub fn new(rows: usize, cols: usize, data: Array2<T>) -> Result<Self> {
        Self::build(rows, cols, data, false)
    }

    /// Cube that may contain negative values (e.g. after additive noise).
    pub fn with_negatives(rows: usize, cols: usize, data: Array2<T>) -> Result<Self> {
        Self::build(rows, cols, data, true)
    }

    fn build(rows: usize, cols: usize, data: Array2<T>, allow_negative: bool) -> Result<Self> {
        if rows == 0 || cols == 0 || data.nrows() == 0 {
            return Err(Error::dim("cube", "nonzero rows, cols and bands", format!("{rows}x{cols}x{}", data.nrows())));
        }
        if data.ncols() != rows * cols {
            return Err(Error::dim("cube pixel count", rows * cols, data.ncols()));
        }
        check_finite("cube", data.view())?;
        if !allow_negative {
            check_nonnegative("cube", data.view())?;
        }
        Ok(Self {
            rows,
            cols,
            data,
            allow_negative,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn bands(&self) -> usize {
        self.data.nrows()
    }

    pub fn pixels(&self) -> usize {
        self.data.ncols()
    }

    /// Whether negative entries were permitted at construction.
    pub fn allows_negative(&self) -> bool {
        self.allow_negative
    }

    pub fn data(&self) -> ArrayView2<'_, T> {
        self.data.view()
    }

    pub fn into_data(self) -> Array2<T> {
        self.data
    }

    pub fn pixel(&self, j: usize) -> ArrayView1<'_, T> {
        self.data.column(j)
    }

    /// Copy with negative entries replaced by zero.
    pub fn clamp_nonnegative(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.mapv(|v| v.max(T::zero())),
            allow_negative: false,
        }
    }
}

/// Endmember spectra `E` (`bands x count`), entrywise nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct EndmemberMatrix<T> {
    data: Array2<T>,
}

impl<T: Real> EndmemberMatrix<T> {
    pub fn new(data: Array2<T>) -> Result<Self> {
        if data.nrows() == 0 || data.ncols() == 0 {
            return Err(Error::dim("endmembers", "at least one band and one endmember", format!("{:?}", data.dim())));
        }
        check_finite("endmembers", data.view())?;
        check_nonnegative("endmembers", data.view())?;
        if let Some(k) = data.axis_iter(Axis(1)).position(|c| c.iter().all(|v| v.is_zero())) {
            return Err(Error::ZeroEndmember(k));
        }
        Ok(Self { data })
    }

    pub fn bands(&self) -> usize {
        self.data.nrows()
    }

    pub fn count(&self) -> usize {
        self.data.ncols()
    }

    pub fn data(&self) -> ArrayView2<'_, T> {
        self.data.view()
    }

    pub fn into_data(self) -> Array2<T> {
        self.data
    }

    pub fn column(&self, k: usize) -> ArrayView1<'_, T> {
        self.data.column(k)
    }

    /// Reorders columns so that column `perm[k]` of the result is column `k` here.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.count() {
            return Err(Error::dim("endmember permutation", self.count(), perm.len()));
        }
        let mut out = Array2::zeros(self.data.raw_dim());
        for (k, &dst) in perm.iter().enumerate() {
            out.column_mut(dst).assign(&self.data.column(k));
        }
        Ok(Self { data: out })
    }
}

/// Abundances `A` (`count x pixels`), entrywise nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct AbundanceMatrix<T> {
    data: Array2<T>,
    simplex: bool,
}

impl<T: Real> AbundanceMatrix<T> {
    /// Nonnegative abundances without a sum-to-one requirement.
    pub fn new(data: Array2<T>) -> Result<Self> {
        if data.nrows() == 0 || data.ncols() == 0 {
            return Err(Error::dim("abundances", "nonempty matrix", format!("{:?}", data.dim())));
        }
        check_finite("abundances", data.view())?;
        check_nonnegative("abundances", data.view())?;
        Ok(Self {
            data,
            simplex: false,
        })
    }

    /// Abundances whose columns each sum to one within [`SIMPLEX_TOL`].
    pub fn new_simplex(data: Array2<T>) -> Result<Self> {
        let mut a = Self::new(data)?;
        for (col, c) in a.data.axis_iter(Axis(1)).enumerate() {
            let sum: f64 = c.iter().map(|v| v.as_f64()).sum();
            if (sum - 1.0).abs() > SIMPLEX_TOL {
                return Err(Error::NotOnSimplex { col, sum });
            }
        }
        a.simplex = true;
        Ok(a)
    }

    pub fn count(&self) -> usize {
        self.data.nrows()
    }

    pub fn pixels(&self) -> usize {
        self.data.ncols()
    }

    pub fn is_simplex(&self) -> bool {
        self.simplex
    }

    pub fn data(&self) -> ArrayView2<'_, T> {
        self.data.view()
    }

    pub fn into_data(self) -> Array2<T> {
        self.data
    }

    /// Reorders rows so that row `perm[k]` of the result is row `k` here.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.count() {
            return Err(Error::dim("abundance permutation", self.count(), perm.len()));
        }
        let mut out = Array2::zeros(self.data.raw_dim());
        for (k, &dst) in perm.iter().enumerate() {
            out.row_mut(dst).assign(&self.data.row(k));
        }
        Ok(Self {
            data: out,
            simplex: self.simplex,
        })
    }

    /// The abundance maps as a `count x rows x cols` image stack.
    pub fn to_maps(&self, rows: usize, cols: usize) -> Result<Array3<T>> {
        reshape_to_cube(self.data.view(), rows, cols)
    }
}

/// Which spectral bands survive preprocessing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BandMask {
    keep: Vec<bool>,
}

impl BandMask {
    pub fn new(keep: Vec<bool>) -> Result<Self> {
        if !keep.iter().any(|&k| k) {
            return Err(Error::EmptyMask);
        }
        Ok(Self { keep })
    }

    /// Mask of length `bands` dropping the given zero-based band indices.
    pub fn dropping(bands: usize, drop: &[usize]) -> Result<Self> {
        let mut keep = vec![true; bands];
        for &b in drop {
            if b >= bands {
                return Err(Error::dim("band mask index", format!("< {bands}"), b));
            }
            keep[b] = false;
        }
        Self::new(keep)
    }

    pub fn len(&self) -> usize {
        self.keep.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keep.is_empty()
    }

    pub fn kept(&self) -> usize {
        self.keep.iter().filter(|&&k| k).count()
    }

    pub fn keep(&self) -> &[bool] {
        &self.keep
    }
}

/// Turns a `count x (rows*cols)` matrix into `count` images of `rows x cols`.
///
/// Image `p` at `(i, j)` is `a[p, i*cols + j]`.
pub fn reshape_to_cube<T: Clone>(a: ArrayView2<T>, rows: usize, cols: usize) -> Result<Array3<T>> {
    if a.ncols() != rows * cols {
        return Err(Error::dim("reshape to image stack", rows * cols, a.ncols()));
    }
    let p = a.nrows();
    let flat: Vec<T> = a.iter().cloned().collect();
    Ok(Array3::from_shape_vec((p, rows, cols), flat).expect("shape checked above"))
}

/// Inverse of [`reshape_to_cube`].
pub fn reshape_to_matrix<T: Clone>(stack: ArrayView3<T>) -> Array2<T> {
    let (p, rows, cols) = stack.dim();
    let flat: Vec<T> = stack.iter().cloned().collect();
    Array2::from_shape_vec((p, rows * cols), flat).expect("element count preserved")
}

/// Keeps only the bands flagged in `mask`, in their original order.
pub fn apply_band_mask<T: Real>(cube: &SpectralCube<T>, mask: &BandMask) -> Result<SpectralCube<T>> {
    if mask.len() != cube.bands() {
        return Err(Error::dim("band mask length", cube.bands(), mask.len()));
    }
    let kept: Vec<usize> = mask
        .keep()
        .iter()
        .enumerate()
        .filter_map(|(b, &k)| k.then_some(b))
        .collect();
    let data = cube.data().select(Axis(0), &kept);
    Ok(SpectralCube {
        rows: cube.rows,
        cols: cube.cols,
        data,
        allow_negative: cube.allow_negative,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn reshape_single_map_is_row_major() {
        let a = array![[1.0, 2.0, 3.0, 4.0]];
        let maps = reshape_to_cube(a.view(), 2, 2).unwrap();
        assert_eq!(maps.index_axis(Axis(0), 0), array![[1.0, 2.0], [3.0, 4.0]]);
    }

    #[test]
    fn reshape_one_row_images_equal_matrix_rows() {
        let a = array![[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]];
        let maps = reshape_to_cube(a.view(), 1, 3).unwrap();
        for p in 0..2 {
            assert_eq!(maps.index_axis(Axis(0), p).row(0), a.row(p));
        }
    }

    #[test]
    fn reshape_round_trip() {
        let a = Array2::from_shape_fn((3, 20), |(p, j)| (p * 31 + j * 7) as f64 * 0.37);
        let back = reshape_to_matrix(reshape_to_cube(a.view(), 4, 5).unwrap().view());
        assert_eq!(a, back);
    }

    #[test]
    fn reshape_rejects_bad_dims() {
        let a = Array2::<f64>::zeros((2, 6));
        assert!(matches!(reshape_to_cube(a.view(), 2, 2), Err(Error::Dimension { .. })));
    }

    #[test]
    fn band_mask_selects_in_order() {
        let data = array![[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]];
        let cube = SpectralCube::new(1, 2, data).unwrap();
        let all = apply_band_mask(&cube, &BandMask::new(vec![true; 3]).unwrap()).unwrap();
        assert_eq!(all, cube);
        let some = apply_band_mask(&cube, &BandMask::new(vec![true, false, true]).unwrap()).unwrap();
        assert_eq!(some.data(), array![[1.0, 2.0], [5.0, 6.0]]);
        assert_eq!((some.rows(), some.cols()), (1, 2));
    }

    #[test]
    fn band_mask_errors() {
        assert!(matches!(BandMask::new(vec![false, false]), Err(Error::EmptyMask)));
        let cube = SpectralCube::new(1, 1, array![[1.0], [2.0]]).unwrap();
        let mask = BandMask::new(vec![true, true, true]).unwrap();
        assert!(matches!(apply_band_mask(&cube, &mask), Err(Error::Dimension { .. })));
    }

    #[test]
    fn constructors_validate() {
        assert!(matches!(
            SpectralCube::new(1, 1, array![[-0.1]]),
            Err(Error::Negative { .. })
        ));
        assert!(SpectralCube::with_negatives(1, 1, array![[-0.1]]).unwrap().allows_negative());
        assert!(matches!(
            SpectralCube::new(2, 2, Array2::<f64>::zeros((3, 3))),
            Err(Error::Dimension { .. })
        ));
        assert!(matches!(
            EndmemberMatrix::new(array![[1.0, 0.0], [1.0, 0.0]]),
            Err(Error::ZeroEndmember(1))
        ));
        assert!(matches!(
            AbundanceMatrix::new(array![[f64::NAN]]),
            Err(Error::NonFinite { .. })
        ));
        assert!(matches!(
            AbundanceMatrix::new_simplex(array![[0.5], [0.4]]),
            Err(Error::NotOnSimplex { col: 0, .. })
        ));
        assert!(AbundanceMatrix::new_simplex(array![[0.5f32], [0.5]]).unwrap().is_simplex());
    }

    #[test]
    fn permutations_move_rows_and_columns() {
        let e = EndmemberMatrix::new(array![[1.0, 2.0], [3.0, 4.0]]).unwrap();
        assert_eq!(e.permuted(&[1, 0]).unwrap().data(), array![[2.0, 1.0], [4.0, 3.0]]);
        let a = AbundanceMatrix::new(array![[1.0, 2.0], [3.0, 4.0]]).unwrap();
        assert_eq!(a.permuted(&[1, 0]).unwrap().data(), array![[3.0, 4.0], [1.0, 2.0]]);
    }
}
