//! One-dimensional adaptive quadrature.
//!
//! [`integrate`] is a globally adaptive Gauss-Kronrod (10/21) scheme: the
//! panel with the largest error estimate is bisected until the summed error
//! meets `max(abs_tol, rel_tol * |value|)`. Infinite ends are truncated at
//! `±tail_cutoff` once the integrand is verified to be negligible there.
//!
//! [`integrate_with_log_singularity`] handles integrands that diverge like
//! `ln|x - x0|` at known points. An interval of half-width `epsilon` around
//! each point is cut out; the remainder is integrated adaptively and the
//! excised piece is integrated in closed form against a local
//! `a + b ln|x - x0|` fit.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{input_err, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Truncation half-width used for infinite integration limits.
    pub tail_cutoff: f64,
    /// Half-width of the interval cut out around each logarithmic singularity.
    pub singularity_epsilon: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
            tail_cutoff: 40.0,
            singularity_epsilon: 1e-8,
        }
    }
}

impl QuadratureConfig {
    /// Default configuration with both tolerances set to `tol`.
    pub fn with_tolerance(tol: f64) -> Self {
        Self {
            abs_tol: tol,
            rel_tol: tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.abs_tol) || !positive(self.rel_tol) {
            return input_err("quadrature tolerances must be positive and finite");
        }
        if self.max_subdivisions == 0 {
            return input_err("max_subdivisions must be at least 1");
        }
        if !positive(self.tail_cutoff) || self.tail_cutoff < 10.0 {
            return input_err("tail_cutoff must be at least 10");
        }
        if !positive(self.singularity_epsilon) {
            return input_err("singularity_epsilon must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationResult {
    pub value: f64,
    pub error_estimate: f64,
    pub subdivisions_used: usize,
    /// Magnitude bound `|2 eps ln c + 4 eps ln eps|` (weighted by the local
    /// integrand scale) of the excised neighbourhoods. Zero when nothing was
    /// excised. The excised pieces themselves are integrated and included in
    /// `value`; this field records how much they could have contributed.
    pub excision_bound: f64,
}

// Gauss-Kronrod 10/21 nodes and weights (QUADPACK qk21).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    /// Roundoff floor of `error` for this panel.
    floor: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    // Largest error first; ties broken by position so the order is total.
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

const ROUNDOFF_FLOOR: f64 = 50.0 * f64::EPSILON;

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 {
            res_asc * scale
        } else {
            res_asc
        };
    }
    if res_abs > f64::MIN_POSITIVE / ROUNDOFF_FLOOR {
        scaled = scaled.max(ROUNDOFF_FLOOR * res_abs);
    }
    scaled
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Panel> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);
    let mut res_kronrod = f_center * WGK[10];
    let mut res_gauss = 0.0;
    let mut res_abs = res_kronrod.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];

    for j in 0..10 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        res_kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_gauss += WG[j / 2] * (f1 + f2);
        }
    }
    if !res_kronrod.is_finite() {
        return Err(Error::Numerical(format!(
            "integrand is not finite on [{a:e}, {b:e}]"
        )));
    }

    let mean = 0.5 * res_kronrod;
    let mut res_asc = WGK[10] * (f_center - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let err = (res_kronrod - res_gauss) * half;
    let abs_half = half.abs();
    Ok(Panel {
        a,
        b,
        value: res_kronrod * half,
        error: rescale_error(err, res_abs * abs_half, res_asc * abs_half),
        floor: ROUNDOFF_FLOOR * res_abs * abs_half,
    })
}

/// Finite-interval global adaptive integration.
fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    abs_tol: f64,
    cfg: &QuadratureConfig,
) -> Result<IntegrationResult> {
    adaptive_from(f, &[a, b], abs_tol, cfg)
}

/// Global adaptive integration starting from the panels between consecutive
/// `breaks` (sorted, at least two).
fn adaptive_from<F: Fn(f64) -> f64>(
    f: &F,
    breaks: &[f64],
    abs_tol: f64,
    cfg: &QuadratureConfig,
) -> Result<IntegrationResult> {
    let mut heap = BinaryHeap::new();
    let (mut total, mut total_err, mut total_floor) = (0.0, 0.0, 0.0);
    for w in breaks.windows(2) {
        let panel = gauss_kronrod(f, w[0], w[1])?;
        total += panel.value;
        total_err += panel.error;
        total_floor += panel.floor;
        heap.push(panel);
    }
    let mut subdivisions = 0;

    loop {
        // The second test stops once the error estimate is dominated by
        // roundoff, where further splitting cannot help.
        if total_err <= abs_tol.max(cfg.rel_tol * total.abs()) || total_err <= 2.0 * total_floor {
            break;
        }
        if subdivisions >= cfg.max_subdivisions {
            return Err(Error::Quadrature {
                estimate: ordered_sum(heap.into_vec()).0,
                error_estimate: total_err,
                subdivisions,
            });
        }
        let worst = heap.pop().expect("heap never empties");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // The panel cannot be split further in floating point.
            return Err(Error::Quadrature {
                estimate: total,
                error_estimate: total_err,
                subdivisions,
            });
        }
        let left = gauss_kronrod(f, worst.a, mid)?;
        let right = gauss_kronrod(f, mid, worst.b)?;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        total_floor += left.floor + right.floor - worst.floor;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
    }

    let (value, error_estimate) = ordered_sum(heap.into_vec());
    Ok(IntegrationResult {
        value,
        error_estimate,
        subdivisions_used: subdivisions,
        excision_bound: 0.0,
    })
}

/// Sum panel values left to right with compensated summation so the result
/// does not depend on the order panels were refined in.
fn ordered_sum(mut panels: Vec<Panel>) -> (f64, f64) {
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    let mut err = 0.0;
    for p in &panels {
        let t = sum + p.value;
        if sum.abs() >= p.value.abs() {
            comp += (sum - t) + p.value;
        } else {
            comp += (p.value - t) + sum;
        }
        sum = t;
        err += p.error;
    }
    (sum + comp, err)
}

/// Integrate `f` over `[a, b]`; either end may be infinite.
///
/// Infinite ends are replaced by `∓tail_cutoff` after checking that
/// `|f|` there is below `abs_tol / 100`; the cutoff is doubled (up to six
/// times) until that holds. The integrand's mass is assumed to sit inside
/// the truncated window.
pub fn integrate<F>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<IntegrationResult>
where
    F: Fn(f64) -> f64,
{
    cfg.validate()?;
    if a.is_nan() || b.is_nan() || a > b {
        return input_err(format!("invalid integration interval [{a}, {b}]"));
    }
    if a == b {
        return Ok(IntegrationResult {
            value: 0.0,
            error_estimate: 0.0,
            subdivisions_used: 0,
            excision_bound: 0.0,
        });
    }
    let lo = if a.is_infinite() {
        truncation_point(&f, -1.0, b, cfg)?
    } else {
        a
    };
    let hi = if b.is_infinite() {
        truncation_point(&f, 1.0, lo, cfg)?
    } else {
        b
    };
    if lo >= hi {
        return input_err(format!(
            "finite end lies beyond the tail cutoff: [{a}, {b}] truncated to [{lo}, {hi}]"
        ));
    }
    if a.is_finite() && b.is_finite() {
        return adaptive(&f, lo, hi, cfg.abs_tol, cfg);
    }
    // A single Kronrod panel over the wide truncated window can step over a
    // narrow peak entirely, so start from panels graded around the origin.
    let mut breaks = vec![lo, 0.0, hi];
    let mut x = 0.25;
    while x < hi.max(-lo) {
        breaks.extend([-x, x]);
        x *= 2.0;
    }
    breaks.retain(|&p| p >= lo && p <= hi);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    adaptive_from(&f, &breaks, cfg.abs_tol, cfg)
}

fn truncation_point<F: Fn(f64) -> f64>(
    f: &F,
    direction: f64,
    other_end: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let mut cutoff = cfg.tail_cutoff;
    for _ in 0..=6 {
        let x = direction * cutoff;
        // A finite end beyond the cutoff means the whole tail lies outside.
        if (direction < 0.0 && x >= other_end) || (direction > 0.0 && x <= other_end) {
            return Ok(x);
        }
        let fx = f(x);
        if fx.is_finite() && fx.abs() <= cfg.abs_tol / 100.0 {
            return Ok(x);
        }
        cutoff *= 2.0;
    }
    Err(Error::Numerical(format!(
        "integrand not negligible at ±{cutoff:e}; cannot truncate infinite interval"
    )))
}

/// Closed-form integral of a local `c0 + c1 ln t` fit over `t ∈ (0, width]`,
/// where `t` is the distance from the singular point along `side` (±1).
struct ExcisedSide {
    value: f64,
    residual: f64,
    bound: f64,
}

fn excised_side<F: Fn(f64) -> f64>(f: &F, x0: f64, side: f64, width: f64) -> Result<ExcisedSide> {
    if width <= 0.0 {
        return Ok(ExcisedSide {
            value: 0.0,
            residual: 0.0,
            bound: 0.0,
        });
    }
    let f1 = f(x0 + side * width);
    let f2 = f(x0 + side * 0.5 * width);
    let f4 = f(x0 + side * 0.25 * width);
    if !(f1.is_finite() && f2.is_finite() && f4.is_finite()) {
        return Err(Error::Numerical(format!(
            "integrand not finite next to singular point {x0:e}"
        )));
    }
    let c1 = (f1 - f2) / std::f64::consts::LN_2;
    let c0 = f1 - c1 * width.ln();
    let predicted = c0 + c1 * (0.25 * width).ln();
    let value = c0 * width + c1 * (width * width.ln() - width);
    Ok(ExcisedSide {
        value,
        residual: (f4 - predicted).abs() * width,
        bound: (c0 * width + c1 * width * width.ln()).abs(),
    })
}

/// Integrate `f` over the finite interval `[a, b]`, where `f` may diverge
/// logarithmically at each of `singular_points`.
///
/// Points must lie in `[a, b]` and be at least `4 * singularity_epsilon`
/// apart. A point closer than `epsilon` to an end gets a one-sided (clipped)
/// excision.
pub fn integrate_with_log_singularity<F>(
    f: F,
    a: f64,
    b: f64,
    singular_points: &[f64],
    cfg: &QuadratureConfig,
) -> Result<IntegrationResult>
where
    F: Fn(f64) -> f64,
{
    cfg.validate()?;
    if !(a.is_finite() && b.is_finite()) || a > b {
        return input_err(format!(
            "log-singular integration needs a finite interval, got [{a}, {b}]"
        ));
    }
    let eps = cfg.singularity_epsilon;
    let mut points = singular_points.to_vec();
    if points.iter().any(|p| !p.is_finite() || *p < a || *p > b) {
        return input_err("singular points must lie inside the integration interval");
    }
    points.sort_by(f64::total_cmp);
    if points.windows(2).any(|w| w[1] - w[0] < 4.0 * eps) {
        return input_err(format!(
            "singular points closer than 4*epsilon = {:e}",
            4.0 * eps
        ));
    }

    // Excised neighbourhoods, integrated against the local fit.
    let mut excisions = Vec::with_capacity(points.len());
    let mut excised_value = 0.0;
    let mut excised_residual = 0.0;
    let mut excision_bound = 0.0;
    for &p in &points {
        let left_w = eps.min(p - a);
        let right_w = eps.min(b - p);
        excisions.push((p - left_w, p + right_w));
        for side in [
            excised_side(&f, p, -1.0, left_w)?,
            excised_side(&f, p, 1.0, right_w)?,
        ] {
            excised_value += side.value;
            excised_residual += side.residual;
            excision_bound += side.bound;
        }
    }

    // Regular pieces, with breakpoints graded geometrically towards each
    // singular point. A single Kronrod panel ending next to a weak logarithmic
    // term can badly underestimate its own error.
    let excised = |x: f64| excisions.iter().any(|&(lo, hi)| x > lo && x < hi);
    let mut breaks = vec![a, b];
    for (&p, &(lo, hi)) in points.iter().zip(&excisions) {
        breaks.push(lo);
        breaks.push(hi);
        let mut dist = 10.0 * eps;
        while dist < b - a {
            breaks.extend([p - dist, p + dist]);
            dist *= 10.0;
        }
    }
    breaks.retain(|&x| x >= a && x <= b && !excised(x));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let pieces: Vec<(f64, f64)> = breaks
        .windows(2)
        .map(|w| (w[0], w[1]))
        .filter(|&(lo, hi)| hi > lo && !excised(0.5 * (lo + hi)))
        .collect();

    let share = cfg.abs_tol / pieces.len().max(1) as f64;
    let mut value = 0.0;
    let mut error_estimate = excised_residual;
    let mut subdivisions = 0;
    for (lo, hi) in pieces {
        let r = adaptive(&f, lo, hi, share, cfg)?;
        value += r.value;
        error_estimate += r.error_estimate;
        subdivisions += r.subdivisions_used;
    }
    Ok(IntegrationResult {
        value: value + excised_value,
        error_estimate,
        subdivisions_used: subdivisions,
        excision_bound,
    })
}
