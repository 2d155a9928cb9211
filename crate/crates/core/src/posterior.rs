//! Tabulated posteriors and their distance to the Gaussian approximation.
//!
//! Three routes produce a [`PosteriorGrid`]:
//!
//! * [`posterior_from_observations`]: the exact likelihood product under the
//!   constant prior;
//! * [`posterior_asymptotic`]: `exp(N H(xi_ML - xi))`;
//! * [`gaussian_reference`]: the normal density of variance `1 / (N F)`.
//!
//! All grids span `xi_ML ± 8 sigma / sqrt(N)` (clipped to the parameter
//! domain) and are normalized by the trapezoid rule. Likelihoods are built in
//! log space and shifted by their maximum before exponentiation.

use serde::{Deserialize, Serialize};

use crate::divergence::h_value;
use crate::error::{input_err, Result};
use crate::models::{log_shape, ml_estimate, Interval, ModelId, ModelSpec, Observations};
use crate::quadrature::QuadratureConfig;

pub const DEFAULT_GRID_SIZE: usize = 2001;
pub const MIN_GRID_SIZE: usize = 201;
/// Grid half-width in units of the posterior standard deviation.
pub const GRID_HALF_WIDTH_SIGMAS: f64 = 8.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorGrid {
    pub xi_values: Vec<f64>,
    pub densities: Vec<f64>,
    pub normalized: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    /// Largest `|ln posterior - ln gaussian|` over the 3-sigma window, after
    /// aligning both log-densities at their modes.
    pub sup_log_deviation: f64,
    /// `KL(posterior || gaussian)` by the trapezoid rule over the grid.
    pub kl_to_gaussian: f64,
    pub interval: (f64, f64),
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xw, yw)| 0.5 * (xw[1] - xw[0]) * (yw[0] + yw[1]))
        .sum()
}

impl PosteriorGrid {
    /// Builds a normalized grid from unnormalized log-densities.
    fn from_log_densities(xi_values: Vec<f64>, log_densities: Vec<f64>) -> Result<Self> {
        let max = log_densities
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return input_err("likelihood vanishes on the whole grid");
        }
        let raw: Vec<f64> = log_densities.iter().map(|l| (l - max).exp()).collect();
        let mass = trapezoid(&xi_values, &raw);
        Ok(Self {
            densities: raw.iter().map(|d| d / mass).collect(),
            xi_values,
            normalized: true,
        })
    }

    pub fn len(&self) -> usize {
        self.xi_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi_values.is_empty()
    }

    /// Trapezoid integral of the densities.
    pub fn mass(&self) -> f64 {
        trapezoid(&self.xi_values, &self.densities)
    }

    /// Grid point with the largest density.
    pub fn mode(&self) -> f64 {
        self.xi_values[self.mode_index()]
    }

    fn mode_index(&self) -> usize {
        self.densities
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &d)| {
                if d > best.1 {
                    (i, d)
                } else {
                    best
                }
            })
            .0
    }

    pub fn mean(&self) -> f64 {
        let w: Vec<f64> = self
            .xi_values
            .iter()
            .zip(&self.densities)
            .map(|(x, d)| x * d)
            .collect();
        trapezoid(&self.xi_values, &w) / self.mass()
    }

    pub fn std_dev(&self) -> f64 {
        let mean = self.mean();
        let w: Vec<f64> = self
            .xi_values
            .iter()
            .zip(&self.densities)
            .map(|(x, d)| (x - mean).powi(2) * d)
            .collect();
        (trapezoid(&self.xi_values, &w) / self.mass()).sqrt()
    }

    /// Equal-tailed interval holding `mass` of the probability, from the
    /// piecewise-linear cumulative trapezoid sum.
    pub fn central_interval(&self, mass: f64) -> Result<(f64, f64)> {
        if !(mass > 0.0 && mass < 1.0) {
            return input_err(format!("mass must lie in (0, 1), got {mass}"));
        }
        let total = self.mass();
        let mut cdf = Vec::with_capacity(self.len());
        cdf.push(0.0);
        for i in 1..self.len() {
            let step = 0.5
                * (self.xi_values[i] - self.xi_values[i - 1])
                * (self.densities[i] + self.densities[i - 1]);
            cdf.push(cdf[i - 1] + step / total);
        }
        let quantile = |p: f64| -> f64 {
            let i = cdf.partition_point(|&c| c < p).clamp(1, self.len() - 1);
            let (c0, c1) = (cdf[i - 1], cdf[i]);
            let (x0, x1) = (self.xi_values[i - 1], self.xi_values[i]);
            if c1 > c0 {
                x0 + (x1 - x0) * (p - c0) / (c1 - c0)
            } else {
                x0
            }
        };
        let tail = 0.5 * (1.0 - mass);
        Ok((quantile(tail), quantile(1.0 - tail)))
    }
}

fn check_grid_size(grid_size: usize) -> Result<()> {
    if grid_size < MIN_GRID_SIZE {
        return input_err(format!(
            "grid_size must be at least {MIN_GRID_SIZE}, got {grid_size}"
        ));
    }
    Ok(())
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

fn grid_around(center: f64, fisher: f64, n: usize, grid_size: usize, domain: Interval) -> Vec<f64> {
    let half = GRID_HALF_WIDTH_SIGMAS / (n as f64 * fisher).sqrt();
    let lo = (center - half).max(domain.lo);
    let hi = (center + half).min(domain.hi);
    linspace(lo, hi, grid_size)
}

/// Exact posterior under the constant prior.
///
/// The binomial posterior uses the score form `cos^{2 s} xi sin^{2 (N - s)} xi`
/// (the binomial coefficient is constant in `xi` and cancels).
pub fn posterior_from_observations(
    model: &ModelSpec,
    obs: &Observations,
    grid_size: usize,
) -> Result<PosteriorGrid> {
    check_grid_size(grid_size)?;
    let ml = ml_estimate(model, obs)?;
    let n = obs.len();
    let xi_values = grid_around(ml.xi, model.fisher(), n, grid_size, model.xi_domain);
    let log_densities: Vec<f64> = match model.id {
        ModelId::BinomialTrigIRF => {
            let s = obs.score() as f64;
            let f = (n as f64) - s;
            xi_values
                .iter()
                .map(|&xi| {
                    let (sin, cos) = xi.sin_cos();
                    let term = |k: f64, v: f64| {
                        if k == 0.0 {
                            0.0
                        } else {
                            2.0 * k * v.abs().ln()
                        }
                    };
                    term(s, cos) + term(f, sin)
                })
                .collect()
        }
        _ => xi_values
            .iter()
            .map(|&xi| obs.values().iter().map(|&x| log_shape(model, x - xi)).sum())
            .collect(),
    };
    PosteriorGrid::from_log_densities(xi_values, log_densities)
}

/// Asymptotic posterior `∝ exp(n H(xi_ml - xi))`.
///
/// For the trigonometric models the ML estimate is shifted to zero first and
/// the grid is restricted to `|xi| <= pi/2`; `xi_ml` is then ignored.
pub fn posterior_asymptotic(
    model: &ModelSpec,
    xi_ml: f64,
    n: usize,
    grid_size: usize,
) -> Result<PosteriorGrid> {
    check_grid_size(grid_size)?;
    if n == 0 {
        return input_err("number of observations must be at least 1");
    }
    let center = match model.id {
        ModelId::TrigTranslational | ModelId::BinomialTrigIRF => 0.0,
        _ => {
            model.check_xi(xi_ml)?;
            xi_ml
        }
    };
    let xi_values = grid_around(center, model.fisher(), n, grid_size, model.xi_domain);
    let cfg = QuadratureConfig::default();
    let nf = n as f64;
    let log_densities = xi_values
        .iter()
        .map(|&xi| Ok(nf * h_value(model, center - xi, &cfg)?))
        .collect::<Result<Vec<f64>>>()?;
    PosteriorGrid::from_log_densities(xi_values, log_densities)
}

/// Normal density with mean `xi_ml` and variance `1 / (n fisher)` on the
/// standard grid `xi_ml ± 8 sigma / sqrt(n)`.
pub fn gaussian_reference(
    xi_ml: f64,
    fisher: f64,
    n: usize,
    grid_size: usize,
) -> Result<PosteriorGrid> {
    check_grid_size(grid_size)?;
    if !(fisher.is_finite() && fisher > 0.0) {
        return input_err(format!("Fisher information must be positive, got {fisher}"));
    }
    if n == 0 {
        return input_err("number of observations must be at least 1");
    }
    let xi_values = grid_around(xi_ml, fisher, n, grid_size, Interval::REAL_LINE);
    gaussian_on_grid(xi_ml, fisher, n, xi_values)
}

/// Gaussian reference evaluated on a given grid (renormalized on that grid).
pub fn gaussian_on_grid(
    xi_ml: f64,
    fisher: f64,
    n: usize,
    xi_values: Vec<f64>,
) -> Result<PosteriorGrid> {
    if !(fisher.is_finite() && fisher > 0.0) || n == 0 {
        return input_err("Gaussian reference needs fisher > 0 and n >= 1");
    }
    if xi_values.len() < 2 || xi_values.windows(2).any(|w| w[1] <= w[0]) {
        return input_err("grid must be strictly increasing with at least two points");
    }
    let precision = n as f64 * fisher;
    let log_densities = xi_values
        .iter()
        .map(|&xi| -0.5 * precision * (xi - xi_ml).powi(2))
        .collect();
    PosteriorGrid::from_log_densities(xi_values, log_densities)
}

/// Deviation between a posterior and its Gaussian reference on the
/// reference's 3-sigma window.
pub fn compare_to_gaussian(
    post: &PosteriorGrid,
    reference: &PosteriorGrid,
) -> Result<ComparisonReport> {
    if post.len() != reference.len()
        || post
            .xi_values
            .iter()
            .zip(&reference.xi_values)
            .any(|(a, b)| (a - b).abs() > 1e-12 * a.abs().max(1.0))
    {
        return input_err("posterior and reference must share the same grid");
    }
    if post.len() < 2 {
        return input_err("grids need at least two points");
    }
    let mean = reference.mean();
    let sd = reference.std_dev();
    let interval = (mean - 3.0 * sd, mean + 3.0 * sd);

    let post_peak = post.densities[post.mode_index()].ln();
    let ref_peak = reference.densities[reference.mode_index()].ln();
    let sup_log_deviation = post
        .xi_values
        .iter()
        .zip(post.densities.iter().zip(&reference.densities))
        .filter(|(xi, _)| **xi >= interval.0 && **xi <= interval.1)
        .map(|(_, (p, r))| ((p.ln() - post_peak) - (r.ln() - ref_peak)).abs())
        .fold(0.0, f64::max);

    let (p_mass, r_mass) = (post.mass(), reference.mass());
    let kl_terms: Vec<f64> = post
        .densities
        .iter()
        .zip(&reference.densities)
        .map(|(&p, &r)| {
            if p <= 0.0 {
                0.0
            } else {
                let (p, r) = (p / p_mass, r / r_mass);
                p * (p / r).ln()
            }
        })
        .collect();
    let kl = trapezoid(&post.xi_values, &kl_terms).max(0.0);
    Ok(ComparisonReport {
        sup_log_deviation,
        kl_to_gaussian: kl,
        interval,
    })
}
