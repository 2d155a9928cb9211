use std::f64::consts::{FRAC_PI_2, LN_2, PI};

use gaussn_core::{
    fisher_curvature_form, fisher_gradient_form, h_closed_form, h_derivative_analytic,
    h_derivative_numeric, h_functional, integrate, ModelId, ModelSpec, QuadratureConfig,
};
use proptest::prelude::*;

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

fn models() -> [ModelSpec; 3] {
    [
        ModelSpec::new(ModelId::ChiSquaredLog),
        ModelSpec::gaussian(0.6).unwrap(),
        ModelSpec::new(ModelId::TrigTranslational),
    ]
}

/// Log-densities written out independently of the library.
fn log_p(model: &ModelSpec, x: f64, xi: f64) -> f64 {
    let u = x - xi;
    match model.id {
        ModelId::ChiSquaredLog => u - u.exp(),
        ModelId::GaussianShift => {
            let s = model.sigma_param;
            -0.5 * (u / s).powi(2) - (s * (2.0 * PI).sqrt()).ln()
        }
        _ => unreachable!("line models only"),
    }
}

/// The two-argument form `∫ p(x|xi_ml) ln[p(x|xi) / p(x|xi_ml)] dx`.
fn two_argument_h(model: &ModelSpec, xi_ml: f64, xi: f64) -> f64 {
    let f = |x: f64| {
        let lp = log_p(model, x, xi_ml);
        let p = lp.exp();
        if p == 0.0 {
            0.0
        } else {
            p * (log_p(model, x, xi) - lp)
        }
    };
    integrate(f, f64::NEG_INFINITY, f64::INFINITY, &cfg())
        .unwrap()
        .value
}

#[test]
fn nonpositive_with_unique_zero_on_101_points() {
    for model in models() {
        for k in -50..=50 {
            let delta = k as f64 * 0.06;
            let v = h_functional(&model, delta, &cfg()).unwrap().value;
            if k == 0 {
                assert_eq!(v, 0.0);
            } else {
                assert!(v < 0.0, "{} at {delta}: {v}", model.id);
            }
        }
    }
}

#[test]
fn trig_log_integral_constants() {
    let i0 = integrate(|s: f64| s.cos().ln(), 0.0, FRAC_PI_2, &cfg())
        .unwrap()
        .value;
    let i2 = integrate(
        |s: f64| s.sin().powi(2) * s.cos().ln(),
        0.0,
        FRAC_PI_2,
        &cfg(),
    )
    .unwrap()
    .value;
    assert!((i0 + FRAC_PI_2 * LN_2).abs() <= 1e-8, "{i0}");
    assert!((i2 + PI / 8.0 * (2.0 * LN_2 + 1.0)).abs() <= 1e-8, "{i2}");
    assert!((i0 - 2.0 * i2 - PI / 4.0).abs() <= 1e-8);
}

#[test]
fn fisher_is_minus_the_curvature_of_h() {
    let all = [
        ModelSpec::new(ModelId::ChiSquaredLog),
        ModelSpec::gaussian(2.0).unwrap(),
        ModelSpec::new(ModelId::TrigTranslational),
        ModelSpec::new(ModelId::BinomialTrigIRF),
    ];
    for model in all {
        let curvature = -h_derivative_numeric(&model, 2, 0.0, &cfg()).unwrap();
        let xi = if model.id == ModelId::BinomialTrigIRF {
            0.7
        } else {
            0.0
        };
        for f in [
            fisher_gradient_form(&model, xi, &cfg()).unwrap(),
            fisher_curvature_form(&model, xi, &cfg()).unwrap(),
        ] {
            assert!(
                (f - curvature).abs() <= 1e-4,
                "{}: {f} vs {curvature}",
                model.id
            );
        }
    }
}

#[test]
fn odd_trig_derivatives_vanish_at_zero() {
    let trig = ModelSpec::new(ModelId::TrigTranslational);
    for order in [1, 3] {
        let d = h_derivative_numeric(&trig, order, 0.0, &cfg()).unwrap();
        assert!(d.abs() <= 1e-4, "order {order}: {d}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn quadrature_matches_closed_forms(delta in -3.0..3.0f64) {
        for model in models() {
            let q = h_functional(&model, delta, &cfg()).unwrap().value;
            let c = h_closed_form(&model, delta).unwrap();
            prop_assert!((q - c).abs() <= 1e-7, "{} at {}: {} vs {}", model.id, delta, q, c);
        }
    }

    #[test]
    fn trig_h_is_mirror_symmetric(delta in -3.1..3.1f64) {
        let trig = ModelSpec::new(ModelId::TrigTranslational);
        let plus = h_functional(&trig, delta, &cfg()).unwrap().value;
        let minus = h_functional(&trig, -delta, &cfg()).unwrap().value;
        prop_assert!((plus - minus).abs() <= 1e-9);
    }

    #[test]
    fn translational_reduction_on_the_line(xi_ml in -3.0..3.0f64, xi in -3.0..3.0f64, a in -5.0..5.0f64) {
        for model in [ModelSpec::new(ModelId::ChiSquaredLog), ModelSpec::gaussian(1.5).unwrap()] {
            let base = two_argument_h(&model, xi_ml, xi);
            let moved = two_argument_h(&model, xi_ml + a, xi + a);
            prop_assert!((base - moved).abs() <= 1e-9, "{}: {} vs {}", model.id, base, moved);
            let reduced = h_functional(&model, xi_ml - xi, &cfg()).unwrap().value;
            prop_assert!((base - reduced).abs() <= 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn analytic_and_numeric_derivatives_agree(delta in -1.2..1.2f64) {
        for model in models() {
            for order in 1..=4u32 {
                let a = h_derivative_analytic(&model, order, delta).unwrap();
                let n = h_derivative_numeric(&model, order, delta, &cfg()).unwrap();
                let tol = if order <= 2 { 1e-5 } else { 1e-3 };
                prop_assert!((a - n).abs() <= tol, "{} order {} at {}: {} vs {}", model.id, order, delta, a, n);
            }
        }
    }
}
