use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;
use tvsr::fourier::{adjoint, add_noise, forward, NoiseSpec, SpectralData};
use tvsr::torus::{Image, TorusGrid};

/// Direct `O(n^2)` sum per coefficient.
fn naive_coeff(u: &Image, k1: i64, k2: i64) -> Complex64 {
    let n = u.grid().n_pixels();
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..n {
        for i in 0..n {
            let phase = -2.0 * PI * (i as f64 * k1 as f64 + j as f64 * k2 as f64) / n as f64;
            acc += u.at(i, j) * Complex64::from_polar(1.0, phase);
        }
    }
    acc / (n * n) as f64
}

fn image(n: usize, vals: &[f64]) -> Image {
    Image::from_vec(TorusGrid::new(n).unwrap(), vals.to_vec()).unwrap()
}

#[test]
fn forward_matches_direct_sum() {
    let grid = TorusGrid::new(9).unwrap();
    let u = Image::from_fn(grid, |i, j| ((3 * i + 7 * j) % 5) as f64 - 0.3 * i as f64);
    let f = forward(&u, 4).unwrap();
    for (k1, k2) in f.frequencies() {
        assert!((f.get(k1, k2) - naive_coeff(&u, k1, k2)).norm() < 1e-13, "{k1},{k2}");
    }
    assert!(f.is_hermitian());
}

#[test]
fn full_spectrum_roundtrip_on_odd_grid() {
    let grid = TorusGrid::new(11).unwrap();
    let u = Image::from_fn(grid, |i, j| (i * j % 4) as f64);
    let (back, imag) = adjoint(&forward(&u, 5).unwrap(), grid).unwrap();
    assert!(imag < 1e-12);
    assert!(back.max_abs_diff(&u) < 1e-12);
}

#[test]
fn aliasing_cutoff_is_rejected() {
    let grid = TorusGrid::new(10).unwrap();
    assert!(forward(&Image::zeros(grid), 5).is_err());
    assert!(forward(&Image::zeros(grid), 4).is_ok());
}

#[test]
fn noise_has_requested_energy() {
    let grid = TorusGrid::new(40).unwrap();
    let f = forward(&Image::constant(grid, 1.0), 12).unwrap();
    let trials = 200;
    let mut mean = 0.0;
    for seed in 0..trials {
        let g = add_noise(&f, NoiseSpec { delta: 0.5, seed }).unwrap();
        assert!(g.is_hermitian());
        mean += g.dist_sqr(&f) / 2.0 / trials as f64;
    }
    assert!((mean - 0.5).abs() < 0.05, "{mean}");
}

proptest! {
    #[test]
    fn adjoint_pairing(
        vals in prop::collection::vec(-1.0f64..1.0, 64),
        re in prop::collection::vec(-1.0f64..1.0, 49),
        im in prop::collection::vec(-1.0f64..1.0, 49),
    ) {
        let u = image(8, &vals);
        let coeffs = re.iter().zip(&im).map(|(&a, &b)| Complex64::new(a, b)).collect();
        let mut w = SpectralData::from_coeffs(3, coeffs).unwrap();
        w.symmetrize();
        let lhs = forward(&u, 3).unwrap().inner(&w);
        let (kw, _) = adjoint(&w, u.grid()).unwrap();
        let rhs: f64 = u.values().iter().zip(kw.values()).map(|(a, b)| a * b).sum::<f64>() / 64.0;
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn forward_is_linear(
        a in prop::collection::vec(-1.0f64..1.0, 36),
        b in prop::collection::vec(-1.0f64..1.0, 36),
        s in -3.0f64..3.0,
    ) {
        let (ua, ub) = (image(6, &a), image(6, &b));
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + s * y).collect();
        let lhs = forward(&image(6, &sum), 2).unwrap();
        let (fa, fb) = (forward(&ua, 2).unwrap(), forward(&ub, 2).unwrap());
        for (k1, k2) in lhs.frequencies() {
            prop_assert!((lhs.get(k1, k2) - fa.get(k1, k2) - s * fb.get(k1, k2)).norm() < 1e-12);
        }
    }
}
