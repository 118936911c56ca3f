use ndarray::{Array2, Axis};
use pnmf_core::rng::GaussianStream;
use pnmf_core::synth::{add_noise, generate_abundances, generate_scene, mix, SynthConfig};
use pnmf_core::{Abundances, Cube, Endmembers};

fn snr_of(clean: &Cube, noisy: &Cube) -> f64 {
    let mut signal = 0.0;
    let mut noise = 0.0;
    for (c, n) in clean.data().iter().zip(noisy.data().iter()) {
        signal += c * c;
        noise += (n - c) * (n - c);
    }
    10.0 * (signal / noise).log10()
}

#[test]
fn noise_hits_target_snr() {
    // 64 x 64 x 50 = 204800 samples
    let mut s = GaussianStream::new(99);
    let data = Array2::from_shape_simple_fn((50, 64 * 64), || s.uniform());
    let clean = Cube::new(64, 64, data).unwrap();
    for (i, target) in [5.0, 10.0, 20.0, 30.0].into_iter().enumerate() {
        for seed in 0..3u64 {
            let noisy = add_noise(&clean, target, seed * 17 + i as u64).unwrap();
            let snr = snr_of(&clean, &noisy);
            assert!((snr - target).abs() < 0.1, "target {target} seed {seed}: {snr}");
        }
    }
}

#[test]
fn noise_is_seeded() {
    let clean = Cube::new(4, 4, Array2::from_elem((3, 16), 0.5)).unwrap();
    let a = add_noise(&clean, 10.0, 5).unwrap();
    assert_eq!(a.data(), add_noise(&clean, 10.0, 5).unwrap().data());
    assert_ne!(a.data(), add_noise(&clean, 10.0, 6).unwrap().data());
    assert_eq!(add_noise(&clean, f64::INFINITY, 5).unwrap().data(), clean.data());
}

fn neighbour_roughness(a: &Abundances, rows: usize, cols: usize) -> f64 {
    let maps = a.to_maps(rows, cols).unwrap();
    let mut total = 0.0;
    let mut count = 0usize;
    for map in maps.axis_iter(Axis(0)) {
        for i in 0..rows {
            for j in 0..cols {
                if i + 1 < rows {
                    total += (map[[i, j]] - map[[i + 1, j]]).abs();
                    count += 1;
                }
                if j + 1 < cols {
                    total += (map[[i, j]] - map[[i, j + 1]]).abs();
                    count += 1;
                }
            }
        }
    }
    total / count as f64
}

#[test]
fn roughness_decreases_with_smoothness() {
    for seed in [0u64, 1, 2] {
        let rough: Vec<f64> = [1.0, 2.0, 4.0]
            .iter()
            .map(|&smoothness| {
                let cfg = SynthConfig {
                    smoothness,
                    seed,
                    ..SynthConfig::default()
                };
                neighbour_roughness(&generate_abundances(&cfg).unwrap(), cfg.rows, cfg.cols)
            })
            .collect();
        assert!(rough[0] > rough[1] && rough[1] > rough[2], "seed {seed}: {rough:?}");
    }
}

#[test]
fn abundances_are_on_the_simplex_with_pure_pixels() {
    for (p, fraction, seed) in [(2, 0.0, 1), (3, 0.05, 2), (4, 0.2, 3), (6, 0.5, 4)] {
        let cfg = SynthConfig {
            rows: 20,
            cols: 30,
            p,
            pure_pixel_fraction: fraction,
            seed,
            ..SynthConfig::default()
        };
        let a: Abundances = generate_abundances(&cfg).unwrap();
        assert!(a.is_simplex());
        let mut pure = 0;
        for col in a.data().axis_iter(Axis(1)) {
            assert!(col.iter().all(|&v| v >= 0.0));
            assert!((col.sum() - 1.0).abs() < 1e-12);
            if col.iter().filter(|&&v| v == 1.0).count() == 1 && col.iter().filter(|&&v| v == 0.0).count() == p - 1 {
                pure += 1;
            }
        }
        let needed = (fraction * 600.0_f64).ceil() as usize;
        assert!(pure >= needed, "p={p}: {pure} pure pixels, need {needed}");
    }
}

#[test]
fn abundances_are_deterministic() {
    let cfg = SynthConfig::default();
    let a: Abundances = generate_abundances(&cfg).unwrap();
    assert_eq!(a.data(), generate_abundances::<f64>(&cfg).unwrap().data());
    let other = SynthConfig { seed: 1, ..cfg };
    assert_ne!(a.data(), generate_abundances::<f64>(&other).unwrap().data());
}

#[test]
fn mixtures_are_bounded_by_the_library() {
    let mut s = GaussianStream::new(4);
    let e = Endmembers::new(Array2::from_shape_simple_fn((7, 3), || s.uniform() + 0.01)).unwrap();
    let cfg = SynthConfig {
        rows: 8,
        cols: 8,
        p: 3,
        seed: 4,
        ..SynthConfig::default()
    };
    let a = generate_abundances(&cfg).unwrap();
    let cube = mix(&e, &a, 8, 8).unwrap();
    let top = e.data().iter().cloned().fold(0.0, f64::max);
    assert!(cube.data().iter().all(|&v| (0.0..=top + 1e-15).contains(&v)));
}

#[test]
fn scene_uses_leading_library_columns() {
    let mut s = GaussianStream::new(8);
    let lib = Endmembers::new(Array2::from_shape_simple_fn((5, 6), || s.uniform() + 0.01)).unwrap();
    let cfg = SynthConfig {
        rows: 6,
        cols: 5,
        p: 4,
        snr_db: Some(20.0),
        ..SynthConfig::default()
    };
    let scene = generate_scene(&cfg, &lib).unwrap();
    assert_eq!(scene.endmembers.data(), lib.data().slice(ndarray::s![.., ..4]));
    let noisy = scene.noisy.as_ref().unwrap();
    assert_ne!(noisy.data(), scene.clean.data());
    let clamped = generate_scene(&SynthConfig { clamp_noisy: true, ..cfg }, &lib).unwrap();
    assert!(clamped.observed().data().iter().all(|&v| v >= 0.0));
    assert!(!clamped.observed().allows_negative());
}
