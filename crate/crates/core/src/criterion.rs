//! Taylor-remainder test for the Gaussian approximation and the minimal
//! sample size it implies.
//!
//! On the window `|delta| <= 3 sigma / sqrt(N)` with `sigma = F^{-1/2}`, the
//! Lagrange remainder of the expansion of `N H` must be small compared to the
//! quadratic term. The ratio of the two at the window edge is
//!
//! * third-order remainder: `|H'''|_max / (sqrt(N) F^{3/2})`
//! * fourth-order remainder (mirror-symmetric `H`): `3 |H''''|_max / (4 N F^2)`
//!
//! and the approximation is accepted when the ratio is at most a threshold
//! (conventionally 0.1, equality passing).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::divergence::{h_carrier, h_derivative_numeric, h_value, max_abs_derivative};
use crate::error::{input_err, Error, Result};
use crate::models::{ModelId, ModelSpec};
use crate::quadrature::QuadratureConfig;

pub const DEFAULT_THRESHOLD: f64 = 0.1;

/// How the ratio is compared with the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoundingMode {
    /// Raw floating-point comparison.
    Strict,
    /// The ratio is rounded to three decimals first, as in published tables.
    #[default]
    PaperRounding,
}

impl fmt::Display for RoundingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RoundingMode::Strict => "strict",
            RoundingMode::PaperRounding => "paper_rounding",
        })
    }
}

impl FromStr for RoundingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(RoundingMode::Strict),
            "paper_rounding" | "paper-rounding" => Ok(RoundingMode::PaperRounding),
            other => input_err(format!("unknown rounding mode '{other}'")),
        }
    }
}

pub fn round_3dp(v: f64) -> f64 {
    (v * 1000.0).round() / 1000.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub model: ModelId,
    pub n: u64,
    pub fisher: f64,
    /// `F^{-1/2}`.
    pub sigma: f64,
    /// `3 sigma / sqrt(n)`.
    pub halfwidth: f64,
    pub remainder_order: u32,
    pub h_max: f64,
    pub ratio: f64,
    pub threshold: f64,
    pub mode: RoundingMode,
    pub passes: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub n: u64,
    pub ratio_raw: f64,
    pub ratio_3dp: f64,
}

/// Symmetry probe offsets for [`detect_remainder_order`].
const SYMMETRY_PROBES: [f64; 6] = [0.05, 0.1, 0.2, 0.3, 0.5, 0.8];

/// 4 when `H` is mirror-symmetric around its maximum (odd derivatives
/// vanish, so the remainder after the quadratic term is of fourth order),
/// otherwise 3.
pub fn detect_remainder_order(model: &ModelSpec, cfg: &QuadratureConfig) -> Result<u32> {
    let fisher = model.fisher();
    let third = h_derivative_numeric(model, 3, 0.0, cfg)?;
    if third.abs() > 1e-4 * fisher.powf(1.5) {
        return Ok(3);
    }
    let carrier = h_carrier(model);
    for d in SYMMETRY_PROBES {
        let (plus, minus) = (h_value(&carrier, d, cfg)?, h_value(&carrier, -d, cfg)?);
        if (plus - minus).abs() > 1e-8 {
            return Ok(3);
        }
    }
    Ok(4)
}

fn check_n(n: u64) -> Result<()> {
    if n == 0 {
        return input_err("number of observations must be at least 1");
    }
    Ok(())
}

struct Pieces {
    fisher: f64,
    sigma: f64,
    halfwidth: f64,
    h_max: f64,
    ratio: f64,
}

fn ratio_pieces(model: &ModelSpec, order: u32, n: u64) -> Result<Pieces> {
    let fisher = model.fisher();
    let sigma = fisher.sqrt().recip();
    let nf = n as f64;
    let halfwidth = 3.0 * sigma / nf.sqrt();
    let h_max = max_abs_derivative(model, order, halfwidth)?;
    let ratio = match order {
        3 => h_max / (nf.sqrt() * fisher.powf(1.5)),
        4 => 3.0 * h_max / (4.0 * nf * fisher * fisher),
        other => return input_err(format!("remainder order must be 3 or 4, got {other}")),
    };
    Ok(Pieces {
        fisher,
        sigma,
        halfwidth,
        h_max,
        ratio,
    })
}

/// Ratio of the maximal Lagrange remainder to the quadratic term at the edge
/// of the 3-sigma window, for `n` observations.
pub fn remainder_ratio(model: &ModelSpec, n: u64, cfg: &QuadratureConfig) -> Result<f64> {
    check_n(n)?;
    let order = detect_remainder_order(model, cfg)?;
    Ok(ratio_pieces(model, order, n)?.ratio)
}

fn compared(ratio: f64, mode: RoundingMode) -> f64 {
    match mode {
        RoundingMode::Strict => ratio,
        RoundingMode::PaperRounding => round_3dp(ratio),
    }
}

fn check_threshold(threshold: f64) -> Result<()> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return input_err(format!("threshold must lie in (0, 1), got {threshold}"));
    }
    Ok(())
}

/// Full criterion report for `n` observations.
pub fn evaluate_criterion(
    model: &ModelSpec,
    n: u64,
    threshold: f64,
    mode: RoundingMode,
    cfg: &QuadratureConfig,
) -> Result<CriterionReport> {
    check_n(n)?;
    check_threshold(threshold)?;
    let order = detect_remainder_order(model, cfg)?;
    report_for(model, order, n, threshold, mode)
}

fn report_for(
    model: &ModelSpec,
    order: u32,
    n: u64,
    threshold: f64,
    mode: RoundingMode,
) -> Result<CriterionReport> {
    let p = ratio_pieces(model, order, n)?;
    Ok(CriterionReport {
        model: model.id,
        n,
        fisher: p.fisher,
        sigma: p.sigma,
        halfwidth: p.halfwidth,
        remainder_order: order,
        h_max: p.h_max,
        ratio: p.ratio,
        threshold,
        mode,
        passes: compared(p.ratio, mode) <= threshold,
    })
}

/// Smallest `N >= 1` whose ratio passes the threshold, with its report.
///
/// The ratio decreases monotonically in `N` for every supported model, so
/// the first passing `N` is located by doubling followed by bisection; this
/// gives the same answer as an ascending scan.
pub fn minimal_n(
    model: &ModelSpec,
    threshold: f64,
    mode: RoundingMode,
    cfg: &QuadratureConfig,
) -> Result<CriterionReport> {
    check_threshold(threshold)?;
    let order = detect_remainder_order(model, cfg)?;
    let passes = |n: u64| -> Result<bool> {
        Ok(compared(ratio_pieces(model, order, n)?.ratio, mode) <= threshold)
    };
    if passes(1)? {
        return report_for(model, order, 1, threshold, mode);
    }
    let mut fail = 1u64;
    let mut pass = 2u64;
    while !passes(pass)? {
        fail = pass;
        pass = pass
            .checked_mul(2)
            .filter(|&p| p < 1 << 62)
            .ok_or_else(|| Error::Numerical("no passing N below 2^62".into()))?;
    }
    while pass - fail > 1 {
        let mid = fail + (pass - fail) / 2;
        if passes(mid)? {
            pass = mid;
        } else {
            fail = mid;
        }
    }
    report_for(model, order, pass, threshold, mode)
}

/// Ratios for a list of sample sizes, raw and rounded to three decimals.
pub fn table_rows(
    model: &ModelSpec,
    n_values: &[u64],
    cfg: &QuadratureConfig,
) -> Result<Vec<TableRow>> {
    if n_values.is_empty() {
        return input_err("at least one N is required");
    }
    let order = detect_remainder_order(model, cfg)?;
    n_values
        .iter()
        .map(|&n| {
            check_n(n)?;
            let ratio = ratio_pieces(model, order, n)?.ratio;
            Ok(TableRow {
                n,
                ratio_raw: ratio,
                ratio_3dp: round_3dp(ratio),
            })
        })
        .collect()
}
