//! Blind hyperspectral unmixing by nonnegative matrix factorization with an
//! l2,1 row-sparsity penalty and a plug-and-play denoiser prior on the
//! abundance maps.
//!
//! The numerical code is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the common `f64` case.

pub mod cube;
pub mod denoise;
pub mod engine;
pub mod error;
mod filter;
pub mod init;
pub mod io;
pub mod metrics;
mod nnls;
pub mod rng;
pub mod scalar;
pub mod synth;

pub use cube::{AbundanceMatrix, BandMask, EndmemberMatrix, SpectralCube};
pub use denoise::{DenoiseRequest, Denoiser, DenoiserSpec};
pub use engine::{run_unmixing, run_unmixing_with, GroundTruth, RunTrace, UnmixConfig, Unmixing};
pub use error::{Error, Result};
pub use scalar::Real;

pub type Cube = SpectralCube<f64>;
pub type Endmembers = EndmemberMatrix<f64>;
pub type Abundances = AbundanceMatrix<f64>;

pub type Cube32 = SpectralCube<f32>;
pub type Endmembers32 = EndmemberMatrix<f32>;
pub type Abundances32 = AbundanceMatrix<f32>;
