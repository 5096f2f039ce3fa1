use fracsob::fracops::{caputo_deriv, frac_integral, gl_deriv, rl_deriv, SampledFn, TimeGrid};
use fracsob::specfun::gamma;
use proptest::prelude::*;

fn max_rel_err(a: &SampledFn, b: impl Fn(f64) -> f64, from: usize) -> f64 {
    (from..a.values.len())
        .map(|m| {
            let t = a.grid.node(m);
            let e = b(t);
            ((a.values[m] - e) / e).abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn composition_of_integrals() {
    // I^{a1} f behaves like t^{a1} near 0, so the outer left-endpoint sum
    // converges at order min(1, a1 + a2).
    let err = |m: usize, a1: f64, a2: f64| {
        let g = TimeGrid::new(1.0, m).unwrap();
        let f = SampledFn::from_fn(g, |t| 1.0 + t);
        let lhs = frac_integral(&frac_integral(&f, a1).unwrap(), a2).unwrap();
        let rhs = frac_integral(&f, a1 + a2).unwrap();
        lhs.values
            .iter()
            .zip(&rhs.values)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    };
    for (a1, a2) in [(0.3, 0.4), (0.5, 0.5), (0.2, 0.7)] {
        let coarse = err(400, a1, a2);
        let fine = err(800, a1, a2);
        let order = (coarse / fine).log2();
        assert!(order >= 0.95 * f64::min(1.0, a1 + a2), "a1={a1} a2={a2}: order {order}");
        assert!(fine <= 0.011, "a1={a1} a2={a2}: {fine}");
    }
}

#[test]
fn integral_refinement_is_first_order() {
    let alpha = 0.5;
    let exact = |t: f64| t.powf(1.0 + alpha) / gamma(2.0 + alpha).unwrap();
    let err = |m: usize| {
        let g = TimeGrid::new(1.0, m).unwrap();
        let out = frac_integral(&SampledFn::from_fn(g, |t| t), alpha).unwrap();
        (0..=m).map(|i| (out.values[i] - exact(g.node(i))).abs()).fold(0.0, f64::max)
    };
    let mut prev = err(100);
    for m in [200, 400, 800] {
        let e = err(m);
        assert!(prev / e >= 1.7, "M={m}: ratio {}", prev / e);
        prev = e;
    }
}

#[test]
fn rl_minus_initial_value_is_caputo() {
    let g = TimeGrid::new(1.0, 2000).unwrap();
    let f = SampledFn::from_fn(g, |t| (1.5 * t).cos() + t * t);
    let f0 = f.values[0];
    let shifted = SampledFn::from_fn(g, |t| (1.5 * t).cos() + t * t - f0);
    let rl = rl_deriv(&shifted, 0.6).unwrap();
    let cap = caputo_deriv(&f, 0.6).unwrap();
    for m in 500..=2000 {
        let scale = cap.values[m].abs().max(1e-3);
        assert!((rl.values[m] - cap.values[m]).abs() / scale <= 0.02, "m={m}");
    }
}

#[test]
fn rl_matches_constant_formula_away_from_zero() {
    let g = TimeGrid::new(1.0, 2000).unwrap();
    let f = SampledFn::from_fn(g, |_| 2.0);
    let d = rl_deriv(&f, 0.5).unwrap();
    let err = max_rel_err(&d, |t| 2.0 * t.powf(-0.5) / gamma(0.5).unwrap(), 500);
    assert!(err <= 0.02);
}

#[test]
fn gl_agrees_with_rl_on_smooth_probes() {
    let g = TimeGrid::new(1.0, 2000).unwrap();
    let probes: Vec<Box<dyn Fn(f64) -> f64>> = vec![
        Box::new(|t| 1.0 + t),
        Box::new(|t| t.exp()),
        Box::new(|t| 2.0 + (3.0 * t).sin()),
        Box::new(|t| t * t),
    ];
    for alpha in [0.3, 0.5, 0.8] {
        for p in &probes {
            let f = SampledFn::from_fn(g, p);
            let a = gl_deriv(&f, alpha).unwrap();
            let b = rl_deriv(&f, alpha).unwrap();
            let scale = (500..=2000).map(|m| b.values[m].abs()).fold(0.0, f64::max);
            for m in 500..=2000 {
                let rel = (a.values[m] - b.values[m]).abs() / scale;
                assert!(rel <= 0.02, "alpha={alpha} m={m}: {rel}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn operators_are_linear(
        c1 in -3.0f64..3.0, c2 in -3.0f64..3.0, alpha in 0.1f64..0.9,
        xs in proptest::collection::vec(-1.0f64..1.0, 41),
        ys in proptest::collection::vec(-1.0f64..1.0, 41),
    ) {
        let g = TimeGrid::new(1.0, 40).unwrap();
        let f = SampledFn::new(g, xs.clone()).unwrap();
        let h = SampledFn::new(g, ys.clone()).unwrap();
        let comb = SampledFn::new(g, xs.iter().zip(&ys).map(|(x, y)| c1 * x + c2 * y).collect()).unwrap();
        type Op = fn(&SampledFn, f64) -> fracsob::Result<SampledFn>;
        let ops: [Op; 4] = [frac_integral, caputo_deriv, rl_deriv, gl_deriv];
        for op in ops {
            let a = op(&f, alpha).unwrap();
            let b = op(&h, alpha).unwrap();
            let c = op(&comb, alpha).unwrap();
            for m in 1..=40 {
                let expect = c1 * a.values[m] + c2 * b.values[m];
                let scale = 1.0 + a.values[m].abs() + b.values[m].abs();
                prop_assert!((c.values[m] - expect).abs() <= 1e-12 * scale);
            }
        }
    }
}
