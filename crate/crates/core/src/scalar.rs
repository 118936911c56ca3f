//! Scalar abstraction shared by every numeric routine in the crate.

use ndarray::NdFloat;
use num_traits::FromPrimitive;

/// Floating-point element type of cubes, endmembers and abundances.
///
/// Implemented for `f32` and `f64`. Algorithms are written once against this
/// trait; metrics and a few small dense solves always run in `f64`.
pub trait Real: NdFloat + FromPrimitive + Default {
    /// Converts an `f64` literal or parameter into this type.
    fn of(v: f64) -> Self;

    /// Widens to `f64` (exact for both implementors).
    fn as_f64(self) -> f64;
}

impl Real for f32 {
    #[inline]
    fn of(v: f64) -> Self {
        v as f32
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    #[inline]
    fn of(v: f64) -> Self {
        v
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self
    }
}
