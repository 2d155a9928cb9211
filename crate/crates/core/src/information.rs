//! Fisher information by its two definitions and the constant prior measure.
//!
//! Both forms are computed from finite differences in `xi` of the model
//! density, each by its own route:
//!
//! * gradient form: `∫ (∂p)^2 / p`, with `∂p` a Richardson-extrapolated
//!   central difference of the density (step `1e-5`);
//! * curvature form: `-∫ p ∂² ln p`, with a plain central second difference
//!   of the log-density (step `1e-4`).
//!
//! For the trigonometric model the curvature integrand diverges
//! logarithmically where the shifted cosine vanishes, so it goes through
//! [`integrate_with_log_singularity`].

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{input_err, Result};
use crate::models::{density_unchecked, log_shape, ModelId, ModelSpec};
use crate::quadrature::{integrate, integrate_with_log_singularity, QuadratureConfig};

pub const GRADIENT_STEP: f64 = 1e-5;
pub const CURVATURE_STEP: f64 = 1e-4;
/// Tightest tolerance requested for the finite-difference integrands: the
/// second difference carries roundoff of order `eps / h^2 ~ 1e-8`, and
/// asking for more only stalls the adaptive refinement.
pub const FD_QUAD_TOL: f64 = 1e-8;

fn fd_config(cfg: &QuadratureConfig) -> QuadratureConfig {
    QuadratureConfig {
        abs_tol: cfg.abs_tol.max(FD_QUAD_TOL),
        rel_tol: cfg.rel_tol.max(FD_QUAD_TOL),
        ..*cfg
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FisherReport {
    /// Gradient form at the first probe value.
    pub gradient_form: f64,
    /// Curvature form at the first probe value.
    pub curvature_form: f64,
    pub xi_probe_values: Vec<f64>,
    /// Largest deviation of either form, over all probes, from its value at
    /// the first probe.
    pub max_xi_variation: f64,
    /// Largest `|gradient_form - curvature_form|` over all probes.
    pub max_form_discrepancy: f64,
}

fn density_derivative(model: &ModelSpec, x: f64, xi: f64) -> f64 {
    let central = |h: f64| {
        (density_unchecked(model, x, xi + h) - density_unchecked(model, x, xi - h)) / (2.0 * h)
    };
    (4.0 * central(0.5 * GRADIENT_STEP) - central(GRADIENT_STEP)) / 3.0
}

fn density_second_derivative(model: &ModelSpec, x: f64, xi: f64) -> f64 {
    let h = CURVATURE_STEP;
    (density_unchecked(model, x, xi + h) - 2.0 * density_unchecked(model, x, xi)
        + density_unchecked(model, x, xi - h))
        / (h * h)
}

/// `∫ p(x|xi) [∂_xi ln p(x|xi)]^2 dx` (a sum over `{0, 1}` for the binomial).
pub fn fisher_gradient_form(model: &ModelSpec, xi: f64, cfg: &QuadratureConfig) -> Result<f64> {
    model.check_xi(xi)?;
    let cfg = &fd_config(cfg);
    match model.id {
        ModelId::BinomialTrigIRF => Ok([0.0, 1.0]
            .iter()
            .map(|&x| {
                let p = density_unchecked(model, x, xi);
                if p > 0.0 {
                    density_derivative(model, x, xi).powi(2) / p
                } else {
                    // p' also vanishes here; (p')^2 / p tends to 2 p''.
                    2.0 * density_second_derivative(model, x, xi)
                }
            })
            .sum()),
        _ => {
            let integrand = |u: f64| {
                let x = xi + u;
                let p = density_unchecked(model, x, xi);
                if p > 0.0 {
                    density_derivative(model, x, xi).powi(2) / p
                } else {
                    0.0
                }
            };
            Ok(integrate(integrand, u_lo(model), u_hi(model), cfg)?.value)
        }
    }
}

/// `-∫ p(x|xi) ∂²_xi ln p(x|xi) dx` (a sum over `{0, 1}` for the binomial).
pub fn fisher_curvature_form(model: &ModelSpec, xi: f64, cfg: &QuadratureConfig) -> Result<f64> {
    model.check_xi(xi)?;
    let cfg = &fd_config(cfg);
    let h = CURVATURE_STEP;
    match model.id {
        ModelId::BinomialTrigIRF => Ok([0.0, 1.0]
            .iter()
            .map(|&x| {
                let p = density_unchecked(model, x, xi);
                if p > 0.0 {
                    let lp = |v: f64| density_unchecked(model, x, v).ln();
                    -p * (lp(xi + h) - 2.0 * lp(xi) + lp(xi - h)) / (h * h)
                } else {
                    // -p ∂² ln p = (p')^2 / p - p'' tends to p''.
                    density_second_derivative(model, x, xi)
                }
            })
            .sum()),
        _ => {
            // Translation models: p(x|xi +- h) = shape(u -+ h) with u = x - xi.
            let integrand = |u: f64| {
                let lp = log_shape(model, u);
                if lp == f64::NEG_INFINITY {
                    return 0.0;
                }
                let second =
                    (log_shape(model, u - h) - 2.0 * lp + log_shape(model, u + h)) / (h * h);
                -lp.exp() * second
            };
            if model.id == ModelId::TrigTranslational {
                // Over one period u ∈ [-pi/2, pi/2]; the shifted shapes vanish
                // at u = -pi/2 + h and u = pi/2 - h.
                let r = integrate_with_log_singularity(
                    integrand,
                    -FRAC_PI_2,
                    FRAC_PI_2,
                    &[-FRAC_PI_2 + h, FRAC_PI_2 - h],
                    cfg,
                )?;
                Ok(r.value)
            } else {
                Ok(integrate(integrand, u_lo(model), u_hi(model), cfg)?.value)
            }
        }
    }
}

// Integration range in u = x - xi. The trigonometric density is periodic, so
// any window of length pi covers the observation domain exactly once.
fn u_lo(model: &ModelSpec) -> f64 {
    if model.id == ModelId::TrigTranslational {
        -FRAC_PI_2
    } else {
        f64::NEG_INFINITY
    }
}

fn u_hi(model: &ModelSpec) -> f64 {
    if model.id == ModelId::TrigTranslational {
        FRAC_PI_2
    } else {
        f64::INFINITY
    }
}

/// Probe values spread over the interior of the parameter domain. The
/// binomial probes stay away from `xi = 0, ±pi/2`, where one outcome has zero
/// probability and the finite-difference steps straddle the boundary.
pub fn default_probes(model: &ModelSpec, count: usize) -> Vec<f64> {
    let (lo, hi) = match model.id {
        ModelId::ChiSquaredLog | ModelId::GaussianShift => (-3.0, 3.0),
        ModelId::TrigTranslational => (-1.5, 1.5),
        ModelId::BinomialTrigIRF => (0.1, 1.45),
    };
    if count == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect()
}

/// Both Fisher forms at each probe value, with their spread over `xi`.
pub fn fisher_report(
    model: &ModelSpec,
    probes: &[f64],
    cfg: &QuadratureConfig,
) -> Result<FisherReport> {
    if probes.is_empty() {
        return input_err("at least one probe value is required");
    }
    let mut grads = Vec::with_capacity(probes.len());
    let mut curvs = Vec::with_capacity(probes.len());
    for &xi in probes {
        grads.push(fisher_gradient_form(model, xi, cfg)?);
        curvs.push(fisher_curvature_form(model, xi, cfg)?);
    }
    let (g0, c0) = (grads[0], curvs[0]);
    let max_xi_variation = grads
        .iter()
        .map(|g| (g - g0).abs())
        .chain(curvs.iter().map(|c| (c - c0).abs()))
        .fold(0.0, f64::max);
    let max_form_discrepancy = grads
        .iter()
        .zip(&curvs)
        .map(|(g, c)| (g - c).abs())
        .fold(0.0, f64::max);
    Ok(FisherReport {
        gradient_form: g0,
        curvature_form: c0,
        xi_probe_values: probes.to_vec(),
        max_xi_variation,
        max_form_discrepancy,
    })
}

/// The translation-invariant prior `mu = sqrt(F)` (proportionality constant
/// fixed to one; it cancels in every posterior).
pub fn prior_measure(model: &ModelSpec) -> f64 {
    model.fisher().sqrt()
}
