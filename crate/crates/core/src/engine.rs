//! Alternating NMF solver with an l2,1 row-sparsity penalty and a
//! plug-and-play denoiser prior on an auxiliary copy of the abundances.
//!
//! Each iteration runs, in order:
//!
//! 1. `E <- E . (R A^T) / (E A A^T)`
//! 2. augmentation `R_f = [R; delta 1^T]`, `E_f = [E; delta 1^T]` (soft sum-to-one)
//! 3. `A <- A . (E_f^T R_f + lambda A~) / (E_f^T E_f A + lambda A + alpha D A)`,
//!    with `D = diag(1 / |A_i|)` from the current rows of `A`
//! 4. `A~ <- denoise(reshape(A), sqrt(mu / lambda))`, clamped at zero
//!
//! Lagrange multipliers for the nonnegativity constraints never appear: the
//! multiplicative form already satisfies the complementarity conditions.
//! The tracked objective is `0.5|R - EA|^2 + 0.5 lambda |A - A~|^2 + alpha |A|_{2,1}`;
//! the learnt prior has no closed form and is left out.

use std::time::Instant;

use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use serde::{Deserialize, Serialize};

use crate::cube::{reshape_to_cube, reshape_to_matrix, AbundanceMatrix, EndmemberMatrix, SpectralCube};
use crate::denoise::{DenoiseRequest, Denoiser, DenoiserSpec};
use crate::error::{Error, Result};
use crate::init::{fcls, vca, VcaResult};
use crate::metrics::{align, aligned_abundances, rmse};
use crate::scalar::Real;

/// Consecutive small-change iterations required to stop early.
pub const STALL_WINDOW: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnmixConfig {
    /// Weight of the l2,1 row-sparsity term.
    pub alpha: f64,
    /// Penalty tying `A` to its denoised copy.
    pub lambda: f64,
    /// Strength of the denoiser prior; zero disables it.
    pub mu: f64,
    /// Weight of the sum-to-one augmentation row.
    pub delta: f64,
    pub max_iters: usize,
    /// Relative objective change below which an iteration counts as stalled.
    pub rel_tol: f64,
    pub denoiser: DenoiserSpec,
    /// Added to every multiplicative-update denominator.
    pub eps_guard: f64,
    /// Seeds the VCA random directions.
    pub seed: u64,
}

impl Default for UnmixConfig {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            lambda: 3e4,
            mu: 500.0,
            delta: 10.0,
            max_iters: 300,
            rel_tol: 1e-5,
            denoiser: DenoiserSpec::default(),
            eps_guard: 1e-12,
            seed: 0,
        }
    }
}

impl UnmixConfig {
    /// The handcrafted-prior-only baseline: same settings with `mu = 0`.
    pub fn baseline() -> Self {
        Self {
            mu: 0.0,
            denoiser: DenoiserSpec::Identity,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite_nonneg = [("alpha", self.alpha), ("lambda", self.lambda), ("mu", self.mu), ("rel_tol", self.rel_tol)];
        for (name, v) in finite_nonneg {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(Error::Config(format!("delta must be finite and > 0, got {}", self.delta)));
        }
        if !(self.eps_guard > 0.0 && self.eps_guard <= 1e-6) {
            return Err(Error::Config(format!("eps_guard must lie in (0, 1e-6], got {}", self.eps_guard)));
        }
        if self.mu > 0.0 && self.lambda == 0.0 {
            return Err(Error::Config("lambda must be > 0 when mu > 0".into()));
        }
        self.denoiser.validate()
    }

    /// Noise level handed to the denoiser, `sqrt(mu / lambda)`.
    pub fn prior_sigma(&self) -> f64 {
        if self.mu == 0.0 {
            0.0
        } else {
            (self.mu / self.lambda).sqrt()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveBreakdown {
    /// `0.5 |R - E A|_F^2`
    pub data_fit: f64,
    /// `0.5 lambda |A - A~|_F^2`
    pub split: f64,
    /// `alpha sum_i |A_i|_2`
    pub l21: f64,
    pub total: f64,
}

fn check_same<T>(what: &'static str, a: ArrayView2<T>, b: ArrayView2<T>) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::dim(what, format!("{:?}", a.dim()), format!("{:?}", b.dim())));
    }
    Ok(())
}

fn check_finite<T: Real>(what: &'static str, x: ArrayView2<T>) -> Result<()> {
    match x.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { what, index }),
        None => Ok(()),
    }
}

/// Explicit terms of the augmented Lagrangian.
pub fn objective<T: Real>(
    r: ArrayView2<T>,
    e: ArrayView2<T>,
    a: ArrayView2<T>,
    a_tilde: ArrayView2<T>,
    cfg: &UnmixConfig,
) -> Result<ObjectiveBreakdown> {
    if e.nrows() != r.nrows() || e.ncols() != a.nrows() || a.ncols() != r.ncols() {
        return Err(Error::dim(
            "objective",
            format!("E {}x{}, A {}x{}", r.nrows(), a.nrows(), e.ncols(), r.ncols()),
            format!("E {:?}, A {:?}", e.dim(), a.dim()),
        ));
    }
    check_same("objective auxiliary", a, a_tilde)?;
    for (what, x) in [("R", r), ("E", e), ("A", a), ("auxiliary A", a_tilde)] {
        check_finite(what, x)?;
    }
    let remix = e.dot(&a);
    let data_fit = 0.5
        * r.iter()
            .zip(remix.iter())
            .map(|(x, y)| (x.as_f64() - y.as_f64()).powi(2))
            .sum::<f64>();
    let split = 0.5
        * cfg.lambda
        * a.iter()
            .zip(a_tilde.iter())
            .map(|(x, y)| (x.as_f64() - y.as_f64()).powi(2))
            .sum::<f64>();
    let l21 = cfg.alpha
        * a.axis_iter(Axis(0))
            .map(|row| row.iter().map(|v| v.as_f64().powi(2)).sum::<f64>().sqrt())
            .sum::<f64>();
    Ok(ObjectiveBreakdown {
        data_fit,
        split,
        l21,
        total: data_fit + split + l21,
    })
}

/// `E . max(R A^T, 0) / (E A A^T + eps)`.
///
/// The numerator is floored at zero so negative noise in `R` cannot flip
/// the sign of `E`.
pub fn update_endmembers<T: Real>(r: ArrayView2<T>, e: ArrayView2<T>, a: ArrayView2<T>, eps: T) -> Array2<T> {
    let num = r.dot(&a.t());
    let den = e.dot(&a.dot(&a.t()));
    let mut out = e.to_owned();
    Zip::from(&mut out).and(&num).and(&den).for_each(|x, &n, &d| {
        *x = *x * n.max(T::zero()) / (d + eps);
    });
    out
}

/// `R_f = [R; delta 1_N^T]`, `E_f = [E; delta 1_P^T]`.
pub fn augment_asc<T: Real>(r: ArrayView2<T>, e: ArrayView2<T>, delta: T) -> (Array2<T>, Array2<T>) {
    let grow = |m: ArrayView2<T>| {
        let mut out = Array2::from_elem((m.nrows() + 1, m.ncols()), delta);
        out.slice_mut(ndarray::s![..m.nrows(), ..]).assign(&m);
        out
    };
    (grow(r), grow(e))
}

/// `d_i = 1 / (|A_i|_2 + eps)` for every row `i`.
pub fn row_norm_diag<T: Real>(a: ArrayView2<T>, eps: T) -> Array1<T> {
    a.axis_iter(Axis(0))
        .map(|row| T::one() / (row.dot(&row).sqrt() + eps))
        .collect()
}

/// Numerator and denominator of the abundance update, given the products
/// `E_f^T R_f` and `E_f^T E_f`. Their difference `den - num` is the gradient
/// of the abundance subproblem with `D` held fixed.
pub fn abundance_update_terms<T: Real>(
    ef_t_rf: ArrayView2<T>,
    ef_t_ef: ArrayView2<T>,
    a: ArrayView2<T>,
    a_tilde: ArrayView2<T>,
    alpha: T,
    lambda: T,
    eps: T,
) -> (Array2<T>, Array2<T>) {
    let d = row_norm_diag(a, eps);
    let mut num = ef_t_rf.to_owned();
    num.scaled_add(lambda, &a_tilde);
    let mut den = ef_t_ef.dot(&a);
    Zip::indexed(&mut den).and(&a).for_each(|(i, _), x, &ai| {
        *x += lambda * ai + alpha * d[i] * ai;
    });
    (num, den)
}

fn multiplicative_step<T: Real>(a: ArrayView2<T>, num: &Array2<T>, den: &Array2<T>, eps: T) -> Array2<T> {
    let mut out = a.to_owned();
    Zip::from(&mut out).and(num).and(den).for_each(|x, &n, &d| {
        *x = *x * n.max(T::zero()) / (d + eps);
    });
    out
}

/// `A . (E_f^T R_f + lambda A~) / (E_f^T E_f A + lambda A + alpha D A + eps)`.
pub fn update_abundances<T: Real>(
    r_f: ArrayView2<T>,
    e_f: ArrayView2<T>,
    a: ArrayView2<T>,
    a_tilde: ArrayView2<T>,
    cfg: &UnmixConfig,
) -> Array2<T> {
    let ef_t_rf = e_f.t().dot(&r_f);
    let ef_t_ef = e_f.t().dot(&e_f);
    let eps = T::of(cfg.eps_guard);
    let (num, den) = abundance_update_terms(
        ef_t_rf.view(),
        ef_t_ef.view(),
        a,
        a_tilde,
        T::of(cfg.alpha),
        T::of(cfg.lambda),
        eps,
    );
    multiplicative_step(a, &num, &den, eps)
}

/// Denoiser step: reshape `A` to maps, denoise at `sqrt(mu / lambda)`,
/// reshape back and clamp at zero. Returns `A` unchanged when `mu = 0`.
pub fn apply_prior<T: Real>(a: ArrayView2<T>, cfg: &UnmixConfig, rows: usize, cols: usize) -> Result<Array2<T>> {
    apply_prior_with(a, cfg, &cfg.denoiser, rows, cols)
}

pub fn apply_prior_with<T: Real>(
    a: ArrayView2<T>,
    cfg: &UnmixConfig,
    denoiser: &dyn Denoiser<T>,
    rows: usize,
    cols: usize,
) -> Result<Array2<T>> {
    if cfg.mu == 0.0 {
        return Ok(a.to_owned());
    }
    if cfg.lambda <= 0.0 {
        return Err(Error::Config("lambda must be > 0 when mu > 0".into()));
    }
    let maps = reshape_to_cube(a, rows, cols)?;
    let request = DenoiseRequest::new(maps.view(), cfg.prior_sigma())?;
    let out = denoiser.denoise(&request)?;
    if out.dim() != maps.dim() {
        return Err(Error::Denoiser(format!(
            "output shape {:?} differs from input {:?}",
            out.dim(),
            maps.dim()
        )));
    }
    // `max` would turn NaN into 0 and hide a broken denoiser from the sentinel
    Ok(reshape_to_matrix(out.view()).mapv(|v| if v < T::zero() { T::zero() } else { v }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// One-based iteration index.
    pub iter: usize,
    pub objective: ObjectiveBreakdown,
    /// Abundance RMSE against ground truth after endmember alignment.
    pub rmse: Option<f64>,
    /// Wall time since the start of the iteration loop.
    pub seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    records: Vec<IterationRecord>,
}

impl RunTrace {
    pub fn from_records(records: Vec<IterationRecord>) -> Self {
        Self { records }
    }

    pub fn records(&self) -> &[IterationRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    pub fn rmse_series(&self) -> Vec<f64> {
        self.records.iter().filter_map(|r| r.rmse).collect()
    }

    pub fn objective_series(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.objective.total).collect()
    }

    /// Equality of everything except wall time.
    pub fn same_values(&self, other: &Self) -> bool {
        self.records.len() == other.records.len()
            && self
                .records
                .iter()
                .zip(&other.records)
                .all(|(a, b)| a.iter == b.iter && a.objective == b.objective && a.rmse == b.rmse)
    }
}

#[derive(Debug, Clone)]
pub struct EngineState<T> {
    pub e: EndmemberMatrix<T>,
    pub a: AbundanceMatrix<T>,
    pub a_tilde: AbundanceMatrix<T>,
    /// Iterations executed.
    pub iter: usize,
    pub trace: RunTrace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxIters,
    Converged,
}

/// Ground truth used only for the per-iteration RMSE trace.
#[derive(Debug, Clone, Copy)]
pub struct GroundTruth<'a, T> {
    pub endmembers: &'a EndmemberMatrix<T>,
    pub abundances: &'a AbundanceMatrix<T>,
}

#[derive(Debug, Clone)]
pub struct Unmixing<T> {
    pub state: EngineState<T>,
    pub stop: StopReason,
    /// Pixel indices VCA picked for the initial endmembers.
    pub vca_indices: Vec<usize>,
}

/// Starting point of the iteration loop.
#[derive(Debug, Clone)]
pub struct Initialization<T> {
    pub e: EndmemberMatrix<T>,
    pub a: AbundanceMatrix<T>,
}

/// VCA endmembers and FCLS abundances (with the engine's `delta`).
///
/// Exact zeros are lifted to `eps_guard`: a multiplicative update can never
/// move an entry that starts at zero, and FCLS produces many of them.
pub fn initialize<T: Real>(cube: &SpectralCube<T>, p: usize, cfg: &UnmixConfig) -> Result<(Initialization<T>, VcaResult<T>)> {
    let found = vca(cube, p, cfg.seed)?;
    let a = fcls(cube, &found.endmembers, cfg.delta)?;
    let floor = T::of(cfg.eps_guard);
    let e = EndmemberMatrix::new(found.endmembers.data().mapv(|v| v.max(floor)))?;
    let a = AbundanceMatrix::new(a.data().mapv(|v| v.max(floor)))?;
    Ok((Initialization { e, a }, found))
}

/// Full pipeline: VCA + FCLS initialization followed by the iteration loop
/// with the denoiser named in `cfg`.
pub fn run_unmixing<T: Real>(
    cube: &SpectralCube<T>,
    p: usize,
    cfg: &UnmixConfig,
    truth: Option<GroundTruth<'_, T>>,
) -> Result<Unmixing<T>> {
    run_unmixing_with(cube, p, cfg, &cfg.denoiser, truth)
}

/// As [`run_unmixing`] with a caller-supplied denoiser.
pub fn run_unmixing_with<T: Real>(
    cube: &SpectralCube<T>,
    p: usize,
    cfg: &UnmixConfig,
    denoiser: &dyn Denoiser<T>,
    truth: Option<GroundTruth<'_, T>>,
) -> Result<Unmixing<T>> {
    cfg.validate()?;
    if p == 0 || p > cube.bands().min(cube.pixels()) {
        return Err(Error::Config(format!(
            "endmember count must lie in 1..={}, got {p}",
            cube.bands().min(cube.pixels())
        )));
    }
    let (init, found) = initialize(cube, p, cfg)?;
    let (state, stop) = iterate(cube, init, cfg, denoiser, truth)?;
    Ok(Unmixing {
        state,
        stop,
        vca_indices: found.indices,
    })
}

fn truth_rmse<T: Real>(e: &Array2<T>, a: &Array2<T>, truth: Option<GroundTruth<'_, T>>) -> Result<Option<f64>> {
    let Some(truth) = truth else { return Ok(None) };
    let est_e = EndmemberMatrix::new(e.clone())?;
    let est_a = AbundanceMatrix::new(a.clone())?;
    let alignment = align(&est_e, truth.endmembers)?;
    Ok(Some(rmse(&aligned_abundances(&est_a, &alignment)?, truth.abundances)?))
}

/// The iteration loop from a given starting point. `A~` starts equal to `A`.
pub fn iterate<T: Real>(
    cube: &SpectralCube<T>,
    init: Initialization<T>,
    cfg: &UnmixConfig,
    denoiser: &dyn Denoiser<T>,
    truth: Option<GroundTruth<'_, T>>,
) -> Result<(EngineState<T>, StopReason)> {
    cfg.validate()?;
    let r = cube.data();
    if init.e.bands() != cube.bands() || init.a.pixels() != cube.pixels() || init.e.count() != init.a.count() {
        return Err(Error::dim(
            "initial state",
            format!("E {}x{}, A {}x{}", cube.bands(), init.a.count(), init.e.count(), cube.pixels()),
            format!("E {}x{}, A {}x{}", init.e.bands(), init.e.count(), init.a.count(), init.a.pixels()),
        ));
    }
    let (rows, cols) = (cube.rows(), cube.cols());
    let eps = T::of(cfg.eps_guard);
    let (alpha, lambda) = (T::of(cfg.alpha), T::of(cfg.lambda));
    let d2 = T::of(cfg.delta * cfg.delta);

    let mut e = init.e.into_data();
    let mut a = init.a.into_data();
    let mut a_tilde = a.clone();
    let mut trace = RunTrace::default();
    let mut prev = objective(r, e.view(), a.view(), a_tilde.view(), cfg)?.total;
    let mut stalled = 0;
    let mut stop = StopReason::MaxIters;
    let start = Instant::now();

    for k in 1..=cfg.max_iters {
        e = update_endmembers(r, e.view(), a.view(), eps);
        ensure_finite("endmembers", &e, k)?;

        // E_f^T R_f = E^T R + delta^2, E_f^T E_f = E^T E + delta^2
        let ef_t_rf = e.t().dot(&r) + d2;
        let ef_t_ef = e.t().dot(&e) + d2;
        let (num, den) = abundance_update_terms(ef_t_rf.view(), ef_t_ef.view(), a.view(), a_tilde.view(), alpha, lambda, eps);
        a = multiplicative_step(a.view(), &num, &den, eps);
        ensure_finite("abundances", &a, k)?;

        a_tilde = apply_prior_with(a.view(), cfg, denoiser, rows, cols).map_err(|err| match err {
            Error::Denoiser(msg) => Error::Denoiser(format!("iteration {k}: {msg}")),
            other => Error::Denoiser(format!("iteration {k}: {other}")),
        })?;
        ensure_finite("auxiliary abundances", &a_tilde, k)?;

        let obj = objective(r, e.view(), a.view(), a_tilde.view(), cfg)?;
        trace.records.push(IterationRecord {
            iter: k,
            objective: obj,
            rmse: truth_rmse(&e, &a, truth)?,
            seconds: start.elapsed().as_secs_f64(),
        });

        let change = (obj.total - prev).abs() / prev.max(1e-30);
        prev = obj.total;
        stalled = if change < cfg.rel_tol { stalled + 1 } else { 0 };
        if stalled >= STALL_WINDOW {
            stop = StopReason::Converged;
            break;
        }
    }

    let iter = trace.len();
    Ok((
        EngineState {
            e: EndmemberMatrix::new(e)?,
            a: AbundanceMatrix::new(a)?,
            a_tilde: AbundanceMatrix::new(a_tilde)?,
            iter,
            trace,
        },
        stop,
    ))
}

fn ensure_finite<T: Real>(what: &'static str, x: &Array2<T>, iter: usize) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Diverged { what, iter })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn objective_zero_at_exact_fit() {
        let e = array![[1.0, 0.5], [0.2, 0.9], [0.4, 0.4]];
        let a = array![[0.3, 1.0, 0.0], [0.7, 0.0, 1.0]];
        let r = e.dot(&a);
        let cfg = UnmixConfig {
            alpha: 0.0,
            ..UnmixConfig::default()
        };
        let obj = objective(r.view(), e.view(), a.view(), a.view(), &cfg).unwrap();
        assert!(obj.total.abs() < 1e-28);
    }

    #[test]
    fn l21_of_identity_is_row_count() {
        let a = Array2::<f64>::eye(2);
        let e = Array2::<f64>::eye(2);
        let cfg = UnmixConfig {
            alpha: 1.0,
            lambda: 0.0,
            mu: 0.0,
            ..UnmixConfig::default()
        };
        let obj = objective(a.view(), e.view(), a.view(), a.view(), &cfg).unwrap();
        assert_eq!(obj.l21, 2.0);
        assert_eq!(obj.total, 2.0);
    }

    #[test]
    fn objective_rejects_non_finite() {
        let a = array![[f64::NAN]];
        let one = array![[1.0]];
        assert!(objective(one.view(), one.view(), a.view(), one.view(), &UnmixConfig::default()).is_err());
    }

    #[test]
    fn augmentation_shapes() {
        let r = Array2::<f64>::ones((2, 3));
        let e = Array2::<f64>::ones((2, 4));
        let (rf, ef) = augment_asc(r.view(), e.view(), 10.0);
        assert_eq!(rf.row(2), array![10.0, 10.0, 10.0]);
        assert_eq!(ef.dim(), (3, 4));
        assert!(ef.row(2).iter().all(|&v| v == 10.0));
    }

    #[test]
    fn zero_delta_rejected() {
        let cfg = UnmixConfig {
            delta: 0.0,
            ..UnmixConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn row_norm_weights() {
        let eps = 1e-12f64;
        let d = row_norm_diag(array![[3.0, 4.0], [0.0, 0.0], [6.0, 8.0]].view(), eps);
        assert!((d[0] - 1.0 / (5.0 + eps)).abs() < 1e-15);
        assert_eq!(d[1], 1.0 / eps);
        assert!((d[2] - d[0] / 2.0).abs() < 1e-12);
    }

    #[test]
    fn prior_sigma_from_defaults() {
        let sigma = UnmixConfig::default().prior_sigma();
        assert!((sigma - (1.0f64 / 60.0).sqrt()).abs() < 1e-15);
        assert!((sigma - 0.12910).abs() < 5e-6);
    }

    #[test]
    fn mu_zero_prior_is_identity() {
        let a = array![[0.1, 0.5, 0.9, 0.2]];
        let out = apply_prior(a.view(), &UnmixConfig::baseline(), 2, 2).unwrap();
        assert_eq!(out, a);
    }

    #[test]
    fn prior_keeps_constant_maps() {
        let a = Array2::from_elem((2, 36), 0.25f64);
        for spec in [DenoiserSpec::nlm(), DenoiserSpec::tv(), DenoiserSpec::gaussian()] {
            let cfg = UnmixConfig {
                denoiser: spec,
                ..UnmixConfig::default()
            };
            let out = apply_prior(a.view(), &cfg, 6, 6).unwrap();
            assert!((&out - &a).iter().all(|v| v.abs() < 1e-9));
        }
    }

    #[test]
    fn zero_iterations_return_initialization() {
        let e = array![[0.9, 0.1], [0.2, 0.8], [0.5, 0.5]];
        let a = array![[0.3, 0.6, 0.1, 0.5], [0.7, 0.4, 0.9, 0.5]];
        let cube = SpectralCube::new(2, 2, e.dot(&a)).unwrap();
        let cfg = UnmixConfig {
            max_iters: 0,
            ..UnmixConfig::default()
        };
        let init = Initialization {
            e: EndmemberMatrix::new(e.clone()).unwrap(),
            a: AbundanceMatrix::new(a.clone()).unwrap(),
        };
        let (state, stop) = iterate(&cube, init, &cfg, &cfg.denoiser, None).unwrap();
        assert_eq!(state.e.data(), e);
        assert_eq!(state.a.data(), a);
        assert!(state.trace.is_empty());
        assert_eq!(stop, StopReason::MaxIters);
    }
}
