use ndarray::{Array2, Axis};
use pnmf_core::cube::{apply_band_mask, reshape_to_cube, reshape_to_matrix, BandMask};
use pnmf_core::io::{decode_hsic, encode_hsic, load_cube, load_endmember_csv, store_cube, store_endmember_csv};
use pnmf_core::rng::GaussianStream;
use pnmf_core::{Cube, Endmembers, Error};
use proptest::prelude::*;

fn random_matrix(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
    let mut s = GaussianStream::new(seed);
    Array2::from_shape_simple_fn((rows, cols), || s.normal())
}

proptest! {
    #[test]
    fn reshape_is_a_bijection(p in 1usize..5, rows in 1usize..8, cols in 1usize..8, seed in any::<u64>()) {
        let a = random_matrix(p, rows * cols, seed);
        let stack = reshape_to_cube(a.view(), rows, cols).unwrap();
        prop_assert_eq!(stack.dim(), (p, rows, cols));
        for k in 0..p {
            for i in 0..rows {
                for j in 0..cols {
                    prop_assert_eq!(stack[[k, i, j]], a[[k, i * cols + j]]);
                }
            }
        }
        prop_assert_eq!(reshape_to_matrix(stack.view()), a);
    }

    #[test]
    fn hsic_round_trip_is_bit_exact(
        rows in 1usize..5,
        cols in 1usize..5,
        bands in 1usize..4,
        bits in proptest::collection::vec(any::<u64>(), 64),
    ) {
        let n = rows * cols * bands;
        let values: Vec<f64> = bits
            .iter()
            .map(|&b| f64::from_bits(b))
            .map(|v| if v.is_finite() { v } else { 0.5 })
            .cycle()
            .take(n)
            .collect();
        let data = Array2::from_shape_vec((bands, rows * cols), values).unwrap();
        let bytes = encode_hsic(rows, cols, &data).unwrap();
        prop_assert_eq!(bytes.len(), 20 + 8 * n);
        let back = decode_hsic(&bytes).unwrap();
        prop_assert_eq!((back.rows, back.cols), (rows, cols));
        for (x, y) in back.data.iter().zip(data.iter()) {
            prop_assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn band_mask_keeps_spatial_layout(
        rows in 1usize..5,
        cols in 1usize..5,
        keep in proptest::collection::vec(any::<bool>(), 1..8),
    ) {
        prop_assume!(keep.iter().any(|&k| k));
        let bands = keep.len();
        let data = random_matrix(bands, rows * cols, 7).mapv(f64::abs);
        let cube = Cube::new(rows, cols, data.clone()).unwrap();
        let mask = BandMask::new(keep.clone()).unwrap();
        let out = apply_band_mask(&cube, &mask).unwrap();
        prop_assert_eq!((out.rows(), out.cols(), out.pixels()), (rows, cols, rows * cols));
        let kept: Vec<usize> = (0..bands).filter(|&b| keep[b]).collect();
        let expected = data.select(Axis(0), &kept);
        prop_assert_eq!(out.data(), expected.view());
    }
}

#[test]
fn band_mask_rejects_empty_and_mismatched() {
    assert!(matches!(BandMask::new(vec![false, false]), Err(Error::EmptyMask)));
    let cube = Cube::new(1, 2, Array2::ones((3, 2))).unwrap();
    let mask = BandMask::dropping(4, &[1]).unwrap();
    assert!(apply_band_mask(&cube, &mask).is_err());
}

#[test]
fn cube_file_round_trip_keeps_negatives() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("noisy.hsic");
    let cube = Cube::with_negatives(2, 3, random_matrix(4, 6, 11)).unwrap();
    store_cube(&cube, &path).unwrap();
    let back: Cube = load_cube(&path).unwrap();
    assert_eq!(back.data(), cube.data());
    assert!(back.allows_negative());
}

#[test]
fn zero_cube_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("zeros.hsic");
    let cube = Cube::new(2, 2, Array2::zeros((3, 4))).unwrap();
    store_cube(&cube, &path).unwrap();
    assert_eq!(std::fs::metadata(&path).unwrap().len(), 20 + 8 * 12);
    let back: Cube = load_cube(&path).unwrap();
    assert_eq!(back.data(), cube.data());
}

#[test]
fn endmember_csv_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("e.csv");
    let e = Endmembers::new(random_matrix(6, 3, 5).mapv(|v| v.abs() + 1e-3)).unwrap();
    store_endmember_csv(&e, &path).unwrap();
    let back: Endmembers = load_endmember_csv(&path).unwrap();
    assert_eq!(back.data(), e.data());
}

#[test]
fn trace_round_trip() {
    use pnmf_core::engine::{IterationRecord, ObjectiveBreakdown, RunTrace};
    use pnmf_core::io::{load_trace, store_trace};
    let records: Vec<IterationRecord> = (1..=3)
        .map(|k| IterationRecord {
            iter: k,
            objective: ObjectiveBreakdown {
                data_fit: 1.0 / k as f64,
                split: 0.1,
                l21: 0.25,
                total: 1.0 / k as f64 + 0.35,
            },
            rmse: if k == 2 { None } else { Some(0.01 * k as f64) },
            seconds: 0.5 * k as f64,
        })
        .collect();
    let trace = RunTrace::from_records(records);
    let dir = tempfile::tempdir().unwrap();
    let timed = dir.path().join("timed.csv");
    store_trace(&trace, &timed, true).unwrap();
    assert_eq!(load_trace(&timed).unwrap(), trace);

    let plain = dir.path().join("plain.csv");
    store_trace(&trace, &plain, false).unwrap();
    let back = load_trace(&plain).unwrap();
    assert!(back.same_values(&trace));
    assert!(back.records().iter().all(|r| r.seconds == 0.0));
    let text = std::fs::read_to_string(&plain).unwrap();
    assert!(text.lines().skip(1).all(|l| l.ends_with(',')));
}
