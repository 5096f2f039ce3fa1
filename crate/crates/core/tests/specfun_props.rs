use fracsob::specfun::{
    mainardi_density, mainardi_density_integral, mainardi_density_series, mainardi_moment, mittag_leffler,
    series_switch_point, theta_quadrature,
};
use proptest::prelude::*;

const ALPHAS: [f64; 5] = [0.3, 0.5, 0.6, 0.8, 0.9];

#[test]
fn density_nonnegative_on_log_grid() {
    for alpha in ALPHAS {
        for i in 0..=60 {
            let theta = 10f64.powf(-2.0 + 3.0 * i as f64 / 60.0);
            let v = mainardi_density(alpha, theta, 1e-12).unwrap();
            assert!(v >= 0.0, "alpha={alpha} theta={theta}: {v}");
        }
    }
}

#[test]
fn normalization_and_moments() {
    for alpha in ALPHAS {
        let rule = theta_quadrature(alpha, 200).unwrap();
        assert!(rule.normalization_defect() <= 1e-8, "alpha={alpha}: {}", rule.normalization_defect());
        for v in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let exact = mainardi_moment(alpha, v).unwrap();
            assert!((rule.moment(v) - exact).abs() <= 1e-6, "alpha={alpha} v={v}");
        }
    }
}

#[test]
fn laplace_identity() {
    for alpha in ALPHAS {
        let rule = theta_quadrature(alpha, 200).unwrap();
        for i in 0..=20 {
            let x = 5.0 * i as f64 / 20.0;
            let quad = rule.integrate(|t| (-x * t).exp());
            let ml = mittag_leffler(alpha, 1.0, -x).unwrap();
            assert!((quad - ml).abs() <= 1e-6, "alpha={alpha} x={x}: {quad} vs {ml}");
        }
    }
}

#[test]
fn mittag_leffler_half_matches_density_quadrature() {
    let rule = theta_quadrature(0.5, 200).unwrap();
    let quad = rule.integrate(|t| (-t).exp());
    assert!((mittag_leffler(0.5, 1.0, -1.0).unwrap() - quad).abs() < 1e-8);
}

#[test]
fn representations_agree_on_overlap() {
    for alpha in ALPHAS {
        let hi = series_switch_point(alpha, 1e-12).unwrap();
        let lo = 0.05f64.min(hi / 4.0);
        for i in 0..=24 {
            let theta = lo * (hi / lo).powf(i as f64 / 24.0);
            let a = mainardi_density_series(alpha, theta, 1e-12).unwrap();
            let b = mainardi_density_integral(alpha, theta, 1e-12).unwrap();
            assert!((a - b).abs() <= 1e-7, "alpha={alpha} theta={theta}: {a} vs {b}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn density_is_nonnegative_and_bounded(alpha in 0.2f64..0.95, theta in 1e-3f64..20.0) {
        let v = mainardi_density(alpha, theta, 1e-12).unwrap();
        prop_assert!(v >= 0.0);
        prop_assert!(v < 5.0);
    }
}
