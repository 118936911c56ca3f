use ndarray::{Array1, Array2};
use pnmf_core::metrics::{align, psnr, reconstruction_error, rmse, sad, ReNormalizer};
use pnmf_core::rng::GaussianStream;
use pnmf_core::{Abundances, Cube, Endmembers};

fn uniform(rows: usize, cols: usize, s: &mut GaussianStream) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || s.uniform())
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for rest in permutations(n - 1) {
        for pos in 0..=rest.len() {
            let mut p = rest.clone();
            p.insert(pos, n - 1);
            out.push(p);
        }
    }
    out
}

fn angle(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    (dot / (na * nb)).clamp(-1.0, 1.0).acos()
}

#[test]
fn alignment_is_optimal_over_all_permutations() {
    let mut s = GaussianStream::new(1);
    for p in 1..=6 {
        for _ in 0..5 {
            let truth = Endmembers::new(uniform(8, p, &mut s) + 0.01).unwrap();
            let est = Endmembers::new(uniform(8, p, &mut s) + 0.01).unwrap();
            let cost = |k: usize, t: usize| angle(&est.column(k).to_vec(), &truth.column(t).to_vec());
            let best = permutations(p)
                .iter()
                .map(|perm| perm.iter().enumerate().map(|(k, &t)| cost(k, t)).sum::<f64>())
                .fold(f64::INFINITY, f64::min);
            let found = align(&est, &truth).unwrap();
            let mut seen = found.perm.clone();
            seen.sort_unstable();
            assert_eq!(seen, (0..p).collect::<Vec<_>>());
            let total: f64 = found.per_pair_sad.iter().sum();
            assert!((total - best).abs() <= 1e-12 * best.max(1.0), "p={p}: {total} vs {best}");
        }
    }
}

#[test]
fn alignment_undoes_a_known_shuffle() {
    let mut s = GaussianStream::new(2);
    let truth = Endmembers::new(uniform(10, 5, &mut s) + 0.01).unwrap();
    let shuffle = [3, 0, 4, 1, 2];
    // estimated column k is truth column shuffle[k]
    let est = Endmembers::new(truth.data().select(ndarray::Axis(1), &shuffle)).unwrap();
    let al = align(&est, &truth).unwrap();
    assert_eq!(al.perm, shuffle.to_vec());
    assert!(al.mean_sad() < 1e-7);
}

#[test]
fn sad_is_symmetric_scale_invariant_and_total() {
    let mut s = GaussianStream::new(3);
    for _ in 0..50 {
        let a = Array1::from_shape_simple_fn(7, || s.uniform() + 0.01);
        let b = Array1::from_shape_simple_fn(7, || s.uniform() + 0.01);
        let ab = sad(a.view(), b.view()).unwrap();
        assert_eq!(ab, sad(b.view(), a.view()).unwrap());
        let scaled = &a * 3.7;
        assert!((sad(scaled.view(), b.view()).unwrap() - ab).abs() < 1e-12);
        let nearly = &a * (1.0 + 1e-16);
        let same = sad(a.view(), nearly.view()).unwrap();
        assert!(same.is_finite() && same < 1e-7);
    }
}

#[test]
fn rmse_and_re_are_homogeneous() {
    let mut s = GaussianStream::new(4);
    for _ in 0..20 {
        let truth = uniform(3, 12, &mut s);
        let resid = uniform(3, 12, &mut s) - 0.5;
        let at = Abundances::new(truth.clone() + 2.0).unwrap();
        let base = rmse(&Abundances::new(&truth + &resid + 2.0).unwrap(), &at).unwrap();
        let scaled = rmse(&Abundances::new(&truth + &(&resid * 2.5) + 2.0).unwrap(), &at).unwrap();
        assert!((scaled - 2.5 * base).abs() < 1e-12 * scaled);
        assert_eq!(rmse(&at, &at).unwrap(), 0.0);

        let e = Endmembers::new(uniform(6, 3, &mut s) + 0.1).unwrap();
        let a = Abundances::new(uniform(3, 12, &mut s)).unwrap();
        let clean = e.data().dot(&a.data());
        let noise = uniform(6, 12, &mut s) - 0.5;
        let re = |k: f64| {
            let cube = Cube::with_negatives(3, 4, &clean + &(&noise * k)).unwrap();
            reconstruction_error(&cube, &e, &a, ReNormalizer::default()).unwrap()
        };
        assert!((re(3.0) - 3.0 * re(1.0)).abs() < 1e-12 * re(3.0));
        assert_eq!(re(0.0), 0.0);
    }
}

#[test]
fn psnr_falls_as_error_grows_and_ignores_row_order() {
    let mut s = GaussianStream::new(5);
    let truth = uniform(4, 30, &mut s);
    let noise = uniform(4, 30, &mut s) - 0.5;
    let at = Abundances::new(truth.clone()).unwrap();
    let mut last = f64::INFINITY;
    for k in [0.01, 0.02, 0.05, 0.1, 0.2] {
        let est = Abundances::new((&truth + &(&noise * k)).mapv(|v: f64| v.abs())).unwrap();
        let v = psnr(&est, &at).unwrap();
        assert!(v < last);
        last = v;
    }
    assert_eq!(psnr(&at, &at).unwrap(), f64::INFINITY);

    let perm = [2, 0, 3, 1];
    let est = Abundances::new(truth.mapv(|v| (v - 0.01).max(0.0))).unwrap();
    let shuffled_est = est.permuted(&perm).unwrap();
    let shuffled_truth = at.permuted(&perm).unwrap();
    let direct = psnr(&est, &at).unwrap();
    assert!((psnr(&shuffled_est, &shuffled_truth).unwrap() - direct).abs() < 1e-12);
}
