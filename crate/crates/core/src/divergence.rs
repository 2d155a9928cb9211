//! The functional `H`, the negative Kullback-Leibler divergence between the
//! model at the ML estimate and at `xi`.
//!
//! Everything here is a function of the single offset `delta = xi_ML - xi`:
//!
//! ```text
//! H(delta) = ∫ p(u) ln[ p(u + delta) / p(u) ] du
//! ```
//!
//! and every derivative is taken with respect to `delta`. Derivatives with
//! respect to `xi` differ by `(-1)^order`; only odd orders change sign.
//!
//! `BinomialTrigIRF` has no separate two-point `H`: its functional is the
//! one of the translational extension `TrigTranslational`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{input_err, Error, Result};
use crate::models::{log_shape, wrap_half_period, ModelId, ModelSpec};
use crate::quadrature::{
    integrate, integrate_with_log_singularity, IntegrationResult, QuadratureConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HMethod {
    Quadrature,
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HEvaluation {
    /// `xi_ML - xi`.
    pub delta: f64,
    pub value: f64,
    pub error_estimate: f64,
    pub method: HMethod,
}

fn is_trig(model: &ModelSpec) -> bool {
    matches!(
        model.id,
        ModelId::TrigTranslational | ModelId::BinomialTrigIRF
    )
}

fn check_delta(model: &ModelSpec, delta: f64) -> Result<()> {
    if !delta.is_finite() {
        return input_err(format!("delta must be finite, got {delta}"));
    }
    if is_trig(model) && delta.abs() > PI + 1e-12 {
        return input_err(format!(
            "trigonometric H is defined for |delta| <= pi, got {delta}"
        ));
    }
    Ok(())
}

/// `H(delta)` by quadrature.
///
/// Quadrature noise can push values within the error estimate of zero above
/// it; the returned value is clamped to `<= 0`.
pub fn h_functional(model: &ModelSpec, delta: f64, cfg: &QuadratureConfig) -> Result<HEvaluation> {
    check_delta(model, delta)?;
    h_quadrature(model, delta, cfg)
}

fn h_quadrature(model: &ModelSpec, delta: f64, cfg: &QuadratureConfig) -> Result<HEvaluation> {
    let (value, error_estimate) = if delta == 0.0 {
        (0.0, 0.0)
    } else {
        let r = h_integral(model, delta, cfg)?;
        (r.value.min(0.0), r.error_estimate)
    };
    Ok(HEvaluation {
        delta,
        value,
        error_estimate,
        method: HMethod::Quadrature,
    })
}

fn h_integral(model: &ModelSpec, delta: f64, cfg: &QuadratureConfig) -> Result<IntegrationResult> {
    // The trigonometric H has period pi in delta.
    let d = if is_trig(model) {
        wrap_half_period(delta)
    } else {
        delta
    };
    let integrand = |u: f64| {
        let lp = log_shape(model, u);
        if lp == f64::NEG_INFINITY {
            return 0.0;
        }
        lp.exp() * (log_shape(model, u + d) - lp)
    };
    if is_trig(model) {
        // cos(u + d) vanishes at u = pi/2 - d (mod pi).
        let s0 = wrap_half_period(FRAC_PI_2 - d);
        let singular: Vec<f64> = if s0 > -FRAC_PI_2 {
            vec![s0]
        } else {
            Vec::new()
        };
        integrate_with_log_singularity(integrand, -FRAC_PI_2, FRAC_PI_2, &singular, cfg)
    } else {
        integrate(integrand, f64::NEG_INFINITY, f64::INFINITY, cfg)
    }
}

/// Closed forms obtained by integrating the first derivative of `H` from 0:
/// `delta + 1 - e^delta`, `-delta^2 / (2 sigma^2)` and `cos(2 delta) - 1`.
pub fn h_closed_form(model: &ModelSpec, delta: f64) -> Result<f64> {
    if !delta.is_finite() {
        return input_err(format!("delta must be finite, got {delta}"));
    }
    match model.id {
        ModelId::ChiSquaredLog => Ok(-(delta.exp_m1() - delta)),
        ModelId::GaussianShift => Ok(-0.5 * (delta / model.sigma_param).powi(2)),
        ModelId::TrigTranslational => Ok(-2.0 * delta.sin().powi(2)),
        ModelId::BinomialTrigIRF => Err(Error::Unsupported(
            "no closed-form H for the binomial model; use its trigonometric extension".into(),
        )),
    }
}

/// `H(delta)` from the closed form when one exists, else by quadrature.
/// The binomial model uses its trigonometric extension.
pub fn h_value(model: &ModelSpec, delta: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let target = h_carrier(model);
    match h_closed_form(&target, delta) {
        Ok(v) => Ok(v),
        Err(Error::Unsupported(_)) => Ok(h_functional(&target, delta, cfg)?.value),
        Err(e) => Err(e),
    }
}

/// The model whose `H` stands for `model`'s.
pub(crate) fn h_carrier(model: &ModelSpec) -> ModelSpec {
    if model.id == ModelId::BinomialTrigIRF {
        ModelSpec::new(ModelId::TrigTranslational)
    } else {
        *model
    }
}

/// `d^order H / d delta^order` in closed form.
pub fn h_derivative_analytic(model: &ModelSpec, order: u32, delta: f64) -> Result<f64> {
    if order == 0 {
        return input_err("derivative order must be at least 1");
    }
    if !delta.is_finite() {
        return input_err(format!("delta must be finite, got {delta}"));
    }
    match model.id {
        ModelId::ChiSquaredLog => Ok(if order == 1 {
            -delta.exp_m1()
        } else {
            -delta.exp()
        }),
        ModelId::GaussianShift => {
            let var = model.sigma_param.powi(2);
            Ok(match order {
                1 => -delta / var,
                2 => -1.0 / var,
                _ => 0.0,
            })
        }
        ModelId::TrigTranslational => {
            // d^k/d delta^k (cos 2 delta - 1) = 2^k cos(2 delta + k pi/2)
            let scale = 2f64.powi(order as i32);
            let (s, c) = (2.0 * delta).sin_cos();
            Ok(scale
                * match order % 4 {
                    0 => c,
                    1 => -s,
                    2 => -c,
                    _ => s,
                })
        }
        ModelId::BinomialTrigIRF => Err(Error::Unsupported(
            "analytic H derivatives are not defined for the binomial model".into(),
        )),
    }
}

pub const NUMERIC_STEP_LOW: f64 = 1e-4;
pub const NUMERIC_STEP_HIGH: f64 = 1e-2;

/// Tolerance used for the quadratures behind finite differences: stencil
/// weights grow like `h^-order`, so `H` must be much tighter than the
/// default tolerance.
fn stencil_config(cfg: &QuadratureConfig) -> QuadratureConfig {
    QuadratureConfig {
        abs_tol: cfg.abs_tol.min(1e-14),
        rel_tol: cfg.rel_tol.min(1e-14),
        ..*cfg
    }
}

/// Central finite-difference derivative of [`h_functional`] (orders 1 to 4),
/// with one Richardson extrapolation.
pub fn h_derivative_numeric(
    model: &ModelSpec,
    order: u32,
    delta: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if !(1..=4).contains(&order) {
        return input_err(format!(
            "numeric derivative order must be 1..=4, got {order}"
        ));
    }
    if !delta.is_finite() {
        return input_err(format!("delta must be finite, got {delta}"));
    }
    let target = h_carrier(model);
    let cfg = stencil_config(cfg);
    let h_at = |d: f64| h_quadrature_raw(&target, d, &cfg);
    let stencil = |h: f64| -> Result<f64> {
        Ok(match order {
            1 => (h_at(delta + h)? - h_at(delta - h)?) / (2.0 * h),
            2 => (h_at(delta + h)? - 2.0 * h_at(delta)? + h_at(delta - h)?) / (h * h),
            3 => {
                (h_at(delta + 2.0 * h)? - 2.0 * h_at(delta + h)? + 2.0 * h_at(delta - h)?
                    - h_at(delta - 2.0 * h)?)
                    / (2.0 * h.powi(3))
            }
            _ => {
                (h_at(delta + 2.0 * h)? - 4.0 * h_at(delta + h)? + 6.0 * h_at(delta)?
                    - 4.0 * h_at(delta - h)?
                    + h_at(delta - 2.0 * h)?)
                    / h.powi(4)
            }
        })
    };
    let h = if order <= 2 {
        NUMERIC_STEP_LOW
    } else {
        NUMERIC_STEP_HIGH
    };
    let coarse = stencil(h)?;
    let fine = stencil(0.5 * h)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Quadrature value without clamping, for finite differences.
fn h_quadrature_raw(model: &ModelSpec, delta: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if delta == 0.0 {
        return Ok(0.0);
    }
    Ok(h_integral(model, delta, cfg)?.value)
}

/// Number of scan points used when no closed-form maximum is known.
pub const SCAN_POINTS: usize = 10_000;

/// `max |d^order H / d delta^order|` over `|delta| <= halfwidth`.
pub fn max_abs_derivative(model: &ModelSpec, order: u32, halfwidth: f64) -> Result<f64> {
    if !(halfwidth.is_finite() && halfwidth >= 0.0) {
        return input_err(format!("halfwidth must be nonnegative, got {halfwidth}"));
    }
    if order == 0 {
        return input_err("derivative order must be at least 1");
    }
    let target = h_carrier(model);
    match (target.id, order) {
        // |H^(k)| = e^delta for k >= 2, largest at the upper end.
        (ModelId::ChiSquaredLog, k) if k >= 2 => return Ok(halfwidth.exp()),
        // |H^(4)| = 16 |cos 2 delta|, largest at delta = 0.
        (ModelId::TrigTranslational, 4) => return Ok(16.0),
        (ModelId::GaussianShift, k) if k >= 3 => return Ok(0.0),
        _ => {}
    }
    let cfg = QuadratureConfig::default();
    let mut best = 0.0_f64;
    for i in 0..=SCAN_POINTS {
        let d = -halfwidth + 2.0 * halfwidth * i as f64 / SCAN_POINTS as f64;
        let v = match h_derivative_analytic(&target, order, d) {
            Ok(v) => v,
            Err(Error::Unsupported(_)) if order <= 4 => {
                h_derivative_numeric(&target, order, d, &cfg)?
            }
            Err(e) => return Err(e),
        };
        best = best.max(v.abs());
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{E, FRAC_PI_4};

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn zero_offset_is_exactly_zero() {
        for id in ModelId::ALL {
            let m = ModelSpec::new(id);
            assert_eq!(h_functional(&m, 0.0, &cfg()).unwrap().value, 0.0);
        }
    }

    #[test]
    fn gaussian_quadrature_matches_parabola() {
        let g = ModelSpec::gaussian(1.0).unwrap();
        let h = h_functional(&g, 0.7, &cfg()).unwrap();
        assert_abs_diff_eq!(h.value, -0.245, epsilon = 1e-10);
    }

    #[test]
    fn chi_squared_quadrature_matches_closed_form() {
        let chi = ModelSpec::new(ModelId::ChiSquaredLog);
        assert_abs_diff_eq!(
            h_functional(&chi, 1.0, &cfg()).unwrap().value,
            2.0 - E,
            epsilon = 1e-8
        );
        assert_abs_diff_eq!(
            h_functional(&chi, -1.0, &cfg()).unwrap().value,
            -1.0 / E,
            epsilon = 1e-8
        );
    }

    #[test]
    fn trig_closed_form_values() {
        let trig = ModelSpec::new(ModelId::TrigTranslational);
        assert_abs_diff_eq!(
            h_closed_form(&trig, FRAC_PI_4).unwrap(),
            -1.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            h_closed_form(&trig, FRAC_PI_2).unwrap(),
            -2.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            h_functional(&trig, FRAC_PI_4, &cfg()).unwrap().value,
            -1.0,
            epsilon = 1e-8
        );
        assert_abs_diff_eq!(
            h_functional(&trig, FRAC_PI_2, &cfg()).unwrap().value,
            -2.0,
            epsilon = 1e-8
        );
        let chi = ModelSpec::new(ModelId::ChiSquaredLog);
        assert_eq!(h_closed_form(&chi, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn binomial_has_no_closed_form_but_uses_trig_extension() {
        let binom = ModelSpec::new(ModelId::BinomialTrigIRF);
        assert!(matches!(
            h_closed_form(&binom, 0.3),
            Err(Error::Unsupported(_))
        ));
        assert!(matches!(
            h_derivative_analytic(&binom, 2, 0.3),
            Err(Error::Unsupported(_))
        ));
        assert_abs_diff_eq!(
            h_value(&binom, 0.3, &cfg()).unwrap(),
            (0.6f64).cos() - 1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn analytic_derivative_anchors() {
        let trig = ModelSpec::new(ModelId::TrigTranslational);
        assert_eq!(h_derivative_analytic(&trig, 2, 0.0).unwrap(), -4.0);
        assert_eq!(h_derivative_analytic(&trig, 4, 0.0).unwrap(), 16.0);
        let chi = ModelSpec::new(ModelId::ChiSquaredLog);
        assert_eq!(h_derivative_analytic(&chi, 3, 0.0).unwrap(), -1.0);
        assert_eq!(h_derivative_analytic(&chi, 1, 0.0).unwrap(), 0.0);
        assert!(h_derivative_analytic(&chi, 0, 0.0).is_err());
    }

    #[test]
    fn numeric_derivative_examples() {
        let trig = ModelSpec::new(ModelId::TrigTranslational);
        let d1 = h_derivative_numeric(&trig, 1, 0.3, &cfg()).unwrap();
        assert_abs_diff_eq!(d1, -2.0 * (0.6f64).sin(), epsilon = 1e-4);
        let g = ModelSpec::gaussian(1.0).unwrap();
        assert_abs_diff_eq!(
            h_derivative_numeric(&g, 2, 1.1, &cfg()).unwrap(),
            -1.0,
            epsilon = 1e-5
        );
        let chi = ModelSpec::new(ModelId::ChiSquaredLog);
        assert_abs_diff_eq!(
            h_derivative_numeric(&chi, 2, 0.0, &cfg()).unwrap(),
            -1.0,
            epsilon = 1e-4
        );
        assert!(h_derivative_numeric(&chi, 5, 0.0, &cfg()).is_err());
    }

    #[test]
    fn max_abs_derivative_examples() {
        let chi = ModelSpec::new(ModelId::ChiSquaredLog);
        let hw = 3.0 / 160f64.sqrt();
        assert_abs_diff_eq!(
            max_abs_derivative(&chi, 3, hw).unwrap(),
            hw.exp(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(hw.exp(), 1.26765, epsilon = 1e-5);
        let trig = ModelSpec::new(ModelId::TrigTranslational);
        assert_eq!(max_abs_derivative(&trig, 4, 0.3).unwrap(), 16.0);
        assert_eq!(
            max_abs_derivative(&ModelSpec::gaussian(1.0).unwrap(), 3, 2.0).unwrap(),
            0.0
        );
        // Scan path: |H'| for the trigonometric model peaks at delta = pi/4.
        assert_abs_diff_eq!(
            max_abs_derivative(&trig, 1, 1.0).unwrap(),
            2.0,
            epsilon = 1e-6
        );
    }

    #[test]
    fn trig_delta_out_of_range() {
        let trig = ModelSpec::new(ModelId::TrigTranslational);
        assert!(h_functional(&trig, 3.5, &cfg()).is_err());
        assert!(h_functional(&trig, f64::NAN, &cfg()).is_err());
    }
}
