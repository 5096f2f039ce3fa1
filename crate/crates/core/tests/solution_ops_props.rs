use fracsob::solution_ops::{verify_lemma22, SolutionOperatorCache, DEFAULT_QUAD_NODES};
use fracsob::specfun::mittag_leffler;
use fracsob::spectral::{generator_decay, SpectralField};
use proptest::prelude::*;

#[test]
fn multipliers_match_mittag_leffler() {
    for alpha in [0.5, 0.8] {
        let c = SolutionOperatorCache::new(alpha, 16, DEFAULT_QUAD_NODES).unwrap();
        for i in 0..32 {
            let t = i as f64 / 31.0;
            for n in 1..=16 {
                let z = -generator_decay(n) * t.powf(alpha);
                let l = 1.0 + (n * n) as f64;
                let s = mittag_leffler(alpha, 1.0, z).unwrap() / l;
                let tt = mittag_leffler(alpha, alpha, z).unwrap() / l;
                assert!((c.s_multiplier(t, n).unwrap() - s).abs() <= 1e-6, "alpha={alpha} t={t} n={n}");
                assert!((c.t_multiplier(t, n).unwrap() - tt).abs() <= 1e-6, "alpha={alpha} t={t} n={n}");
            }
        }
    }
}

#[test]
fn multipliers_nonincreasing_in_time() {
    let c = SolutionOperatorCache::new(0.8, 16, DEFAULT_QUAD_NODES).unwrap();
    for n in 1..=16 {
        let mut prev = (f64::INFINITY, f64::INFINITY);
        for i in 0..=200 {
            let t = 2.0 * i as f64 / 200.0;
            let cur = (c.s_multiplier(t, n).unwrap(), c.t_multiplier(t, n).unwrap());
            assert!(cur.0 >= 0.0 && cur.1 >= 0.0);
            assert!(cur.0 <= prev.0 && cur.1 <= prev.1, "n={n} t={t}");
            prev = cur;
        }
    }
}

#[test]
fn continuity_probe() {
    let c = SolutionOperatorCache::new(0.8, 16, DEFAULT_QUAD_NODES).unwrap();
    for t1 in [0.0, 1e-3, 0.1, 0.5, 1.0] {
        for n in 1..=16 {
            let d = (c.s_multiplier(t1 + 1e-6, n).unwrap() - c.s_multiplier(t1, n).unwrap()).abs();
            let e = (c.t_multiplier(t1 + 1e-6, n).unwrap() - c.t_multiplier(t1, n).unwrap()).abs();
            assert!(d <= 1e-4 && e <= 1e-4, "t={t1} n={n}");
        }
    }
}

#[test]
fn envelope_shape_is_bounded() {
    let c = SolutionOperatorCache::new(0.8, 16, DEFAULT_QUAD_NODES).unwrap();
    let samples: Vec<f64> = (0..=60).map(|i| 10f64.powf(-3.0 + 3.0 * i as f64 / 60.0)).collect();
    let report = verify_lemma22(&c, 0.25, &samples, 1000, 11).unwrap();
    assert_eq!(report.constants.c1, 0.5);
    assert_eq!(report.constants.m0, 1.0);
    assert!(report.envelope_constant.is_finite());
    assert!(report.envelope_constant <= report.envelope_bound);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn operators_are_linear(
        a in -2.0f64..2.0, b in -2.0f64..2.0, t in 0.0f64..2.0,
        xs in proptest::collection::vec(-1.0f64..1.0, 16),
        ys in proptest::collection::vec(-1.0f64..1.0, 16),
    ) {
        let c = SolutionOperatorCache::new(0.6, 16, DEFAULT_QUAD_NODES).unwrap();
        let u = SpectralField::new(xs);
        let v = SpectralField::new(ys);
        let mut comb = u.scaled(a);
        comb.add_scaled(b, &v);
        for apply in [SolutionOperatorCache::apply_s, SolutionOperatorCache::apply_t] {
            let mut expect = apply(&c, t, &u).unwrap().scaled(a);
            expect.add_scaled(b, &apply(&c, t, &v).unwrap());
            let got = apply(&c, t, &comb).unwrap();
            prop_assert!(got.sub(&expect).norm() <= 1e-12);
        }
    }
}
