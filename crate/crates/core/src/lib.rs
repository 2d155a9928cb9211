//! Minimal sample size for a Gaussian posterior in translation-invariant
//! one-parameter models.
//!
//! For a model `p(x|xi) = p(x - xi)` with a constant prior, the posterior
//! after `N` observations is `exp(N H(xi_ML - xi))` up to normalization,
//! where `H` is the negative Kullback-Leibler divergence between the model at
//! the ML estimate and at `xi`. Expanding `H` to second order gives a
//! Gaussian of variance `1 / (N F)`. The [`criterion`] module decides from
//! the Lagrange remainder of that expansion how large `N` must be for the
//! Gaussian to be adequate on the 3-sigma window.

pub mod criterion;
pub mod divergence;
pub mod error;
pub mod information;
pub mod models;
pub mod posterior;
pub mod quadrature;
pub mod verify;

pub use criterion::{
    detect_remainder_order, evaluate_criterion, minimal_n, remainder_ratio, table_rows,
    CriterionReport, RoundingMode, TableRow,
};
pub use divergence::{
    h_closed_form, h_derivative_analytic, h_derivative_numeric, h_functional, h_value,
    max_abs_derivative, HEvaluation, HMethod,
};
pub use error::{Error, Result};
pub use information::{
    fisher_curvature_form, fisher_gradient_form, fisher_report, prior_measure, FisherReport,
};
pub use models::{
    density, ml_estimate, normalization_check, sample, Interval, MlEstimate, ModelId, ModelSpec,
    Observations,
};
pub use posterior::{
    compare_to_gaussian, gaussian_on_grid, gaussian_reference, posterior_asymptotic,
    posterior_from_observations, ComparisonReport, PosteriorGrid, DEFAULT_GRID_SIZE,
};
pub use quadrature::{
    integrate, integrate_with_log_singularity, IntegrationResult, QuadratureConfig,
};

/// Library version, reported in CLI output.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
