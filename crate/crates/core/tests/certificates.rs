use proptest::prelude::*;
use tvsr::block::BlockImage;
use tvsr::certificates::{
    approx_char_len, build_certificate_i, build_certificate_iii, fejer, solve_sign_interpolation, verify_polynomial_bounds,
};

fn block() -> BlockImage {
    BlockImage::new(
        120,
        vec![5, 41, 83],
        vec![10, 55, 100],
        vec![vec![0.0, 1.0, 2.0], vec![1.0, 2.0, 3.0], vec![2.0, 3.0, 4.0]],
    )
    .unwrap()
}

#[test]
fn certificate_one_interpolates_line_signs() {
    let b = block();
    let c = build_certificate_i(&b, 18).unwrap();
    assert!(c.bundle.is_valid());
    assert!(c.bundle.support_within_cutoff());
    for (m, &x) in b.xs().iter().enumerate() {
        for y in [0.0, 0.13, 0.77] {
            assert!((c.bundle.g_v.eval(x, y) - b.sign_v()[m] as f64).abs() < 1e-9);
        }
    }
    for (n, &y) in b.ys().iter().enumerate() {
        assert!((c.bundle.g_h.eval(0.3, y) - b.sign_h()[n] as f64).abs() < 1e-9);
    }
    let spec = c.bundle.g_v.spectral();
    assert_eq!(spec.phi(), 18);
    assert!(spec.is_hermitian());
}

#[test]
fn certificate_three_stays_in_unit_ball() {
    let b = block();
    let sv = vec![vec![1, -1, 1], vec![-1, -1, 1], vec![1, 1, -1]];
    let sh = vec![vec![-1, 1, 1], vec![1, -1, -1], vec![1, 1, 1]];
    let c = build_certificate_iii(&b, &sv, &sh, 18).unwrap();
    assert!(c.bundle.is_valid());
    assert!(c.min_segment > 0.25);
    let max = (0..200)
        .flat_map(|i| (0..200).map(move |j| (i as f64 / 200.0, j as f64 / 200.0)))
        .map(|(x, y)| c.bundle.g_v.eval(x, y).abs())
        .fold(0.0, f64::max);
    assert!(max <= 1.0 + 1e-9, "{max}");
}

#[test]
fn fejer_integrates_to_one() {
    let n = 4000;
    let mean: f64 = (0..n).map(|k| fejer(k as f64 / n as f64, 9, 0).unwrap()).sum::<f64>() / n as f64;
    assert!((mean - 1.0).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn separated_points_give_valid_interpolants(
        start in 0.0f64..1.0,
        gaps in prop::collection::vec(0.15f64..0.4, 1..5),
        signs in prop::collection::vec(prop::bool::ANY, 6),
    ) {
        let mut points = vec![start];
        let mut acc = start;
        for g in &gaps {
            acc += g;
            points.push(acc);
        }
        // keep the wrap-around gap separated as well
        prop_assume!(acc - start <= 1.0 - 0.15);
        let points: Vec<f64> = points.iter().map(|t| t.rem_euclid(1.0)).collect();
        let signs: Vec<i8> = signs[..points.len()].iter().map(|&s| if s { 1 } else { -1 }).collect();
        let sys = solve_sign_interpolation(&points, &signs, 18).unwrap();
        let (value, slope) = sys.residuals();
        prop_assert!(value < 1e-9 && slope < 1e-6);
        let bounds = verify_polynomial_bounds(&sys).unwrap();
        prop_assert!(bounds.holds());
        prop_assert!(bounds.kappa > 0.0 && bounds.r > 0.0);
    }

    #[test]
    fn smoothed_indicator_lies_in_unit_interval(a in 0.0f64..1.0, len in 0.05f64..1.0, t in 0.0f64..1.0) {
        let p = approx_char_len(a, len, 12);
        let v = p.eval(t);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&v));
        prop_assert!((p.integral(0.0, 1.0) - len).abs() < 1e-12);
    }
}
