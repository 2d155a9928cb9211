//! The four one-parameter models, their maximum-likelihood estimators and
//! samplers.
//!
//! Three of the models are translation families `p(x|xi) = p(x - xi)`:
//!
//! | model               | density of `u = x - xi`         | domain          |
//! |---------------------|----------------------------------|-----------------|
//! | `ChiSquaredLog`     | `exp(u - e^u)`                   | real line       |
//! | `GaussianShift`     | `N(0, sigma^2)`                  | real line       |
//! | `TrigTranslational` | `(2/pi) cos^2 u`                 | `[-pi/2, pi/2]` |
//!
//! `BinomialTrigIRF` is a Bernoulli model with success probability
//! `cos^2 xi`; its functional `H` is taken from `TrigTranslational`.

use std::f64::consts::{FRAC_2_PI, FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{input_err, Error, Result};
use crate::quadrature::{integrate, QuadratureConfig};

/// Slack for closed-domain membership tests of the trigonometric models.
const DOMAIN_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelId {
    ChiSquaredLog,
    GaussianShift,
    TrigTranslational,
    BinomialTrigIRF,
}

impl ModelId {
    pub const ALL: [ModelId; 4] = [
        ModelId::ChiSquaredLog,
        ModelId::GaussianShift,
        ModelId::TrigTranslational,
        ModelId::BinomialTrigIRF,
    ];

    /// Short name used on the command line.
    pub fn short_name(self) -> &'static str {
        match self {
            ModelId::ChiSquaredLog => "chi2log",
            ModelId::GaussianShift => "gauss",
            ModelId::TrigTranslational => "trig",
            ModelId::BinomialTrigIRF => "binom",
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for ModelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chi2log" => Ok(ModelId::ChiSquaredLog),
            "gauss" => Ok(ModelId::GaussianShift),
            "trig" => Ok(ModelId::TrigTranslational),
            "binom" => Ok(ModelId::BinomialTrigIRF),
            other => input_err(format!(
                "unknown model '{other}' (expected chi2log, gauss, trig or binom)"
            )),
        }
    }
}

/// A closed interval; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const REAL_LINE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };
    pub const HALF_PERIOD: Interval = Interval {
        lo: -FRAC_PI_2,
        hi: FRAC_PI_2,
    };
    pub const BINARY: Interval = Interval { lo: 0.0, hi: 1.0 };

    pub fn contains(&self, v: f64) -> bool {
        v.is_finite() && v >= self.lo - DOMAIN_SLACK && v <= self.hi + DOMAIN_SLACK
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.lo, self.hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub id: ModelId,
    pub x_domain: Interval,
    pub xi_domain: Interval,
    /// Standard deviation of `GaussianShift`; ignored by the other models.
    pub sigma_param: f64,
    pub analytic_fisher: Option<f64>,
}

impl ModelSpec {
    /// Model with default parameters (`sigma = 1` for the Gaussian).
    pub fn new(id: ModelId) -> Self {
        match id {
            ModelId::GaussianShift => Self::gaussian(1.0).expect("unit sigma is valid"),
            ModelId::ChiSquaredLog => Self {
                id,
                x_domain: Interval::REAL_LINE,
                xi_domain: Interval::REAL_LINE,
                sigma_param: 1.0,
                analytic_fisher: Some(1.0),
            },
            ModelId::TrigTranslational => Self {
                id,
                x_domain: Interval::HALF_PERIOD,
                xi_domain: Interval::HALF_PERIOD,
                sigma_param: 1.0,
                analytic_fisher: Some(4.0),
            },
            ModelId::BinomialTrigIRF => Self {
                id,
                x_domain: Interval::BINARY,
                xi_domain: Interval::HALF_PERIOD,
                sigma_param: 1.0,
                analytic_fisher: Some(4.0),
            },
        }
    }

    pub fn gaussian(sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return input_err(format!("sigma must be positive and finite, got {sigma}"));
        }
        Ok(Self {
            id: ModelId::GaussianShift,
            x_domain: Interval::REAL_LINE,
            xi_domain: Interval::REAL_LINE,
            sigma_param: sigma,
            analytic_fisher: Some(1.0 / (sigma * sigma)),
        })
    }

    /// Builds a model by id, using `sigma` only for the Gaussian.
    pub fn with_sigma(id: ModelId, sigma: f64) -> Result<Self> {
        match id {
            ModelId::GaussianShift => Self::gaussian(sigma),
            _ => Ok(Self::new(id)),
        }
    }

    /// Fisher information: the closed form when known.
    pub fn fisher(&self) -> f64 {
        self.analytic_fisher
            .expect("every built-in model carries its Fisher information")
    }

    /// `true` for models of the form `p(x - xi)` on the real line.
    pub fn is_line_model(&self) -> bool {
        matches!(self.id, ModelId::ChiSquaredLog | ModelId::GaussianShift)
    }

    pub(crate) fn check_xi(&self, xi: f64) -> Result<()> {
        if self.xi_domain.contains(xi) {
            Ok(())
        } else {
            input_err(format!(
                "xi = {xi} outside parameter domain [{}, {}] of {}",
                self.xi_domain.lo, self.xi_domain.hi, self.id
            ))
        }
    }

    pub(crate) fn check_x(&self, x: f64) -> Result<()> {
        let ok = match self.id {
            ModelId::BinomialTrigIRF => x == 0.0 || x == 1.0,
            _ => self.x_domain.contains(x),
        };
        if ok {
            Ok(())
        } else {
            input_err(format!("observation {x} outside the domain of {}", self.id))
        }
    }
}

/// Log-density of the translation family as a function of `u = x - xi`.
///
/// For `BinomialTrigIRF` this is the log-density of its translational
/// extension (`TrigTranslational`). No domain check: the trigonometric shape
/// is evaluated periodically.
pub(crate) fn log_shape(model: &ModelSpec, u: f64) -> f64 {
    match model.id {
        ModelId::ChiSquaredLog => u - u.exp(),
        ModelId::GaussianShift => {
            let s = model.sigma_param;
            -0.5 * (u / s).powi(2) - 0.5 * (2.0 * PI * s * s).ln()
        }
        ModelId::TrigTranslational | ModelId::BinomialTrigIRF => {
            FRAC_2_PI.ln() + 2.0 * u.cos().abs().ln()
        }
    }
}

/// `p(x|xi)`.
pub fn density(model: &ModelSpec, x: f64, xi: f64) -> Result<f64> {
    model.check_x(x)?;
    model.check_xi(xi)?;
    Ok(density_unchecked(model, x, xi))
}

pub(crate) fn density_unchecked(model: &ModelSpec, x: f64, xi: f64) -> f64 {
    match model.id {
        ModelId::ChiSquaredLog | ModelId::GaussianShift => log_shape(model, x - xi).exp(),
        ModelId::TrigTranslational => FRAC_2_PI * (x - xi).cos().powi(2),
        ModelId::BinomialTrigIRF => {
            if x == 1.0 {
                xi.cos().powi(2)
            } else {
                xi.sin().powi(2)
            }
        }
    }
}

/// Integral (or sum) of `p(x|xi)` over the observation domain.
pub fn normalization_check(model: &ModelSpec, xi: f64, cfg: &QuadratureConfig) -> Result<f64> {
    model.check_xi(xi)?;
    match model.id {
        ModelId::BinomialTrigIRF => {
            Ok(density_unchecked(model, 0.0, xi) + density_unchecked(model, 1.0, xi))
        }
        ModelId::TrigTranslational => {
            let d = model.x_domain;
            Ok(integrate(|x| density_unchecked(model, x, xi), d.lo, d.hi, cfg)?.value)
        }
        // Integrate in u = x - xi so the mass stays inside the tail cutoff.
        ModelId::ChiSquaredLog | ModelId::GaussianShift => Ok(integrate(
            |u| log_shape(model, u).exp(),
            f64::NEG_INFINITY,
            f64::INFINITY,
            cfg,
        )?
        .value),
    }
}

/// Observed values of one model. Binomial outcomes are stored as `0.0`/`1.0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observations {
    values: Vec<f64>,
}

impl Observations {
    pub fn new(model: &ModelSpec, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return input_err("at least one observation is required");
        }
        for &v in &values {
            model.check_x(v)?;
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of `x = 1` outcomes (the binomial score).
    pub fn score(&self) -> usize {
        self.values.iter().filter(|&&v| v == 1.0).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlEstimate {
    pub xi: f64,
    /// Set when the trigonometric likelihood has several global maxima; `xi`
    /// is then the smallest of them.
    pub ambiguous: bool,
    /// The remaining global maximizers. For `BinomialTrigIRF` this holds the
    /// mirror root `-xi` whenever `xi != 0`, since only `cos^2 xi` is fixed.
    pub other_maximizers: Vec<f64>,
}

impl MlEstimate {
    fn unique(xi: f64) -> Self {
        Self {
            xi,
            ambiguous: false,
            other_maximizers: Vec::new(),
        }
    }
}

/// Maximum-likelihood estimate of `xi`.
pub fn ml_estimate(model: &ModelSpec, obs: &Observations) -> Result<MlEstimate> {
    if obs.is_empty() {
        return input_err("at least one observation is required");
    }
    let values = obs.values();
    for &v in values {
        model.check_x(v)?;
    }
    let n = values.len() as f64;
    match model.id {
        ModelId::ChiSquaredLog => {
            let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let sum: f64 = values.iter().map(|x| (x - max).exp()).sum();
            Ok(MlEstimate::unique(max + (sum / n).ln()))
        }
        ModelId::GaussianShift => Ok(MlEstimate::unique(values.iter().sum::<f64>() / n)),
        ModelId::BinomialTrigIRF => {
            let xi = (obs.score() as f64 / n).sqrt().acos();
            Ok(MlEstimate {
                xi,
                ambiguous: false,
                other_maximizers: if xi > 0.0 { vec![-xi] } else { Vec::new() },
            })
        }
        ModelId::TrigTranslational => Ok(trig_ml(values)),
    }
}

/// Wraps an angle into `[-pi/2, pi/2)`.
pub(crate) fn wrap_half_period(v: f64) -> f64 {
    (v + FRAC_PI_2).rem_euclid(PI) - FRAC_PI_2
}

fn trig_log_likelihood(values: &[f64], xi: f64) -> f64 {
    values.iter().map(|x| 2.0 * (x - xi).cos().abs().ln()).sum()
}

/// The log-likelihood `sum ln cos^2(x_k - xi)` is periodic with period pi and
/// concave between consecutive zeros `xi = x_k ± pi/2`, where it tends to
/// `-inf`. Each arc between zeros therefore holds exactly one local maximum,
/// the root of the strictly decreasing score `sum tan(x_k - xi)`, which is
/// bracketed by the arc ends and found by bisection.
fn trig_ml(values: &[f64]) -> MlEstimate {
    let mut zeros: Vec<f64> = values
        .iter()
        .map(|x| wrap_half_period(x - FRAC_PI_2))
        .collect();
    zeros.sort_by(f64::total_cmp);
    zeros.dedup();

    let score = |xi: f64| -> f64 { values.iter().map(|x| (x - xi).tan()).sum() };

    let mut candidates = Vec::with_capacity(zeros.len());
    for (i, &lo) in zeros.iter().enumerate() {
        let hi = if i + 1 < zeros.len() {
            zeros[i + 1]
        } else {
            zeros[0] + PI
        };
        let (mut l, mut h) = (lo, hi);
        for _ in 0..200 {
            let mid = 0.5 * (l + h);
            if mid <= l || mid >= h {
                break;
            }
            // The score is +inf just right of a zero and -inf just left of one.
            if score(mid) > 0.0 {
                l = mid;
            } else {
                h = mid;
            }
        }
        let xi = wrap_half_period(0.5 * (l + h));
        candidates.push((xi, trig_log_likelihood(values, xi)));
    }

    let best = candidates
        .iter()
        .map(|c| c.1)
        .fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-10 * best.abs().max(1.0);
    let mut maximizers: Vec<f64> = candidates
        .iter()
        .filter(|c| best - c.1 <= tol)
        .map(|c| c.0)
        .collect();
    maximizers.sort_by(f64::total_cmp);
    maximizers.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    let xi = maximizers[0];
    MlEstimate {
        xi,
        ambiguous: maximizers.len() > 1,
        other_maximizers: maximizers[1..].to_vec(),
    }
}

/// Cumulative distribution of `(2/pi) cos^2 s` on `[-pi/2, pi/2]`.
fn trig_cdf(s: f64) -> f64 {
    (s + FRAC_PI_2 + 0.5 * (2.0 * s).sin()) / PI
}

/// Inverse of [`trig_cdf`] by bisection on its bracket `[-pi/2, pi/2]`.
fn trig_quantile(p: f64) -> f64 {
    let (mut lo, mut hi) = (-FRAC_PI_2, FRAC_PI_2);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if trig_cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Draws `n` observations at `xi_true`. Deterministic given `seed`.
pub fn sample(model: &ModelSpec, xi_true: f64, n: usize, seed: u64) -> Result<Observations> {
    model.check_xi(xi_true)?;
    if n == 0 {
        return input_err("sample size must be at least 1");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<f64> = match model.id {
        ModelId::ChiSquaredLog => (0..n)
            .map(|_| {
                let y: f64 = rng.sample(Exp1);
                xi_true + y.ln()
            })
            .collect(),
        ModelId::GaussianShift => (0..n)
            .map(|_| {
                let z: f64 = rng.sample(StandardNormal);
                xi_true + model.sigma_param * z
            })
            .collect(),
        ModelId::TrigTranslational => (0..n)
            .map(|_| {
                let p: f64 = rng.random();
                let x = wrap_half_period(xi_true + trig_quantile(p));
                x.clamp(-FRAC_PI_2, FRAC_PI_2)
            })
            .collect(),
        ModelId::BinomialTrigIRF => {
            let success = xi_true.cos().powi(2);
            (0..n)
                .map(|_| {
                    let p: f64 = rng.random();
                    if p < success {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect()
        }
    };
    Ok(Observations { values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, LN_2};

    #[test]
    fn density_examples() {
        let chi = ModelSpec::new(ModelId::ChiSquaredLog);
        assert_abs_diff_eq!(
            density(&chi, 0.0, 0.0).unwrap(),
            (-1.0f64).exp(),
            epsilon = 1e-15
        );
        let trig = ModelSpec::new(ModelId::TrigTranslational);
        assert_abs_diff_eq!(density(&trig, 0.0, 0.0).unwrap(), 2.0 / PI, epsilon = 1e-15);
        let binom = ModelSpec::new(ModelId::BinomialTrigIRF);
        assert_abs_diff_eq!(
            density(&binom, 1.0, FRAC_PI_3).unwrap(),
            0.25,
            epsilon = 1e-15
        );
    }

    #[test]
    fn density_domain_errors() {
        let trig = ModelSpec::new(ModelId::TrigTranslational);
        assert!(matches!(density(&trig, 2.0, 0.0), Err(Error::Input(_))));
        assert!(matches!(density(&trig, 0.0, -1.6), Err(Error::Input(_))));
        let binom = ModelSpec::new(ModelId::BinomialTrigIRF);
        assert!(density(&binom, 0.5, 0.0).is_err());
        let chi = ModelSpec::new(ModelId::ChiSquaredLog);
        assert!(density(&chi, f64::NAN, 0.0).is_err());
        assert!(ModelSpec::gaussian(0.0).is_err());
    }

    #[test]
    fn normalization_examples() {
        let cfg = QuadratureConfig::default();
        let chi = ModelSpec::new(ModelId::ChiSquaredLog);
        assert_abs_diff_eq!(
            normalization_check(&chi, 0.0, &cfg).unwrap(),
            1.0,
            epsilon = 1e-8
        );
        let trig = ModelSpec::new(ModelId::TrigTranslational);
        assert_abs_diff_eq!(
            normalization_check(&trig, 0.7, &cfg).unwrap(),
            1.0,
            epsilon = 1e-10
        );
        let binom = ModelSpec::new(ModelId::BinomialTrigIRF);
        assert_abs_diff_eq!(
            normalization_check(&binom, 0.3, &cfg).unwrap(),
            1.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn ml_examples() {
        let chi = ModelSpec::new(ModelId::ChiSquaredLog);
        let one = Observations::new(&chi, vec![1.7]).unwrap();
        assert_abs_diff_eq!(ml_estimate(&chi, &one).unwrap().xi, 1.7, epsilon = 1e-14);
        let two = Observations::new(&chi, vec![0.0, 3.0f64.ln()]).unwrap();
        assert_abs_diff_eq!(ml_estimate(&chi, &two).unwrap().xi, LN_2, epsilon = 1e-14);

        let binom = ModelSpec::new(ModelId::BinomialTrigIRF);
        let all = Observations::new(&binom, vec![1.0; 7]).unwrap();
        let est = ml_estimate(&binom, &all).unwrap();
        assert_eq!(est.xi, 0.0);
        assert!(est.other_maximizers.is_empty());
        let half = Observations::new(&binom, vec![1.0, 0.0]).unwrap();
        let est = ml_estimate(&binom, &half).unwrap();
        assert_abs_diff_eq!(est.xi, FRAC_PI_4, epsilon = 1e-15);
        assert_eq!(est.other_maximizers, vec![-est.xi]);
    }

    #[test]
    fn trig_ml_single_and_tied() {
        let trig = ModelSpec::new(ModelId::TrigTranslational);
        let one = Observations::new(&trig, vec![0.4]).unwrap();
        let est = ml_estimate(&trig, &one).unwrap();
        assert_abs_diff_eq!(est.xi, 0.4, epsilon = 1e-12);
        assert!(!est.ambiguous);

        // xi = 0 and xi = -pi/2 (== pi/2) give the same likelihood.
        let tied = Observations::new(&trig, vec![-FRAC_PI_4, FRAC_PI_4]).unwrap();
        let est = ml_estimate(&trig, &tied).unwrap();
        assert!(est.ambiguous);
        assert_abs_diff_eq!(est.xi, -FRAC_PI_2, epsilon = 1e-9);
        assert_eq!(est.other_maximizers.len(), 1);
        assert_abs_diff_eq!(est.other_maximizers[0], 0.0, epsilon = 1e-9);
    }

    #[test]
    fn sampling_is_deterministic() {
        for id in ModelId::ALL {
            let m = ModelSpec::new(id);
            let a = sample(&m, 0.1, 5, 42).unwrap();
            let b = sample(&m, 0.1, 5, 42).unwrap();
            assert_eq!(a, b);
            assert!(a.values().iter().all(|&x| m.check_x(x).is_ok()));
        }
    }

    #[test]
    fn binomial_at_zero_always_succeeds() {
        let binom = ModelSpec::new(ModelId::BinomialTrigIRF);
        let obs = sample(&binom, 0.0, 10, 3).unwrap();
        assert!(obs.values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn trig_quantile_inverts_cdf() {
        for p in [0.0, 0.01, 0.3, 0.5, 0.77, 1.0] {
            assert_abs_diff_eq!(trig_cdf(trig_quantile(p)), p, epsilon = 1e-14);
        }
    }

    #[test]
    fn empty_observations_rejected() {
        let chi = ModelSpec::new(ModelId::ChiSquaredLog);
        assert!(Observations::new(&chi, vec![]).is_err());
        assert!(sample(&chi, 0.0, 0, 1).is_err());
    }

    #[test]
    fn model_names_round_trip() {
        for id in ModelId::ALL {
            assert_eq!(id.short_name().parse::<ModelId>().unwrap(), id);
        }
        assert!("cauchy".parse::<ModelId>().is_err());
    }
}
