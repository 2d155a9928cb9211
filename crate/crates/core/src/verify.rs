//! Cross-module self-checks, runnable from the CLI (`gaussn verify`).

use std::f64::consts::{FRAC_PI_2, LN_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::criterion::table_rows;
use crate::divergence::{h_closed_form, h_derivative_numeric, h_functional};
use crate::error::{input_err, Error, Result};
use crate::information::{default_probes, fisher_report};
use crate::models::{ModelId, ModelSpec};
use crate::quadrature::{integrate, QuadratureConfig};

/// Published `N, ratio` rows for the chi-squared model.
pub const TABLE1_GOLDEN: &str = include_str!("../data/table1.csv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Quadrature,
    Fisher,
    H,
    Table1,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Quadrature, Suite::Fisher, Suite::H, Suite::Table1];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Quadrature => "quadrature",
            Suite::Fisher => "fisher",
            Suite::H => "h",
            Suite::Table1 => "table1",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .map_or_else(|| input_err(format!("unknown suite '{s}'")), Ok)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub suite: Suite,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn count(&self, suite: Suite) -> (usize, usize) {
        let of_suite = self.checks.iter().filter(|c| c.suite == suite);
        let total = of_suite.clone().count();
        (of_suite.filter(|c| c.passed).count(), total)
    }
}

fn close(suite: Suite, name: String, got: Result<f64>, want: f64, tol: f64) -> Check {
    match got {
        Ok(v) => Check {
            suite,
            name,
            passed: (v - want).abs() <= tol,
            detail: format!("got {v:.12e}, expected {want:.12e} ± {tol:e}"),
        },
        Err(e) => Check {
            suite,
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn quadrature_checks(cfg: &QuadratureConfig) -> Vec<Check> {
    let s = Suite::Quadrature;
    vec![
        close(
            s,
            "integral of ln cos over [0, pi/2]".into(),
            integrate(|x: f64| x.cos().ln(), 0.0, FRAC_PI_2, cfg).map(|r| r.value),
            -FRAC_PI_2 * LN_2,
            1e-8,
        ),
        close(
            s,
            "integral of sin^2 ln cos over [0, pi/2]".into(),
            integrate(|x: f64| x.sin().powi(2) * x.cos().ln(), 0.0, FRAC_PI_2, cfg)
                .map(|r| r.value),
            -PI / 8.0 * (2.0 * LN_2 + 1.0),
            1e-8,
        ),
        close(
            s,
            "trigonometric normalization 2/pi".into(),
            integrate(|x: f64| x.cos().powi(2), -FRAC_PI_2, FRAC_PI_2, cfg).map(|r| 1.0 / r.value),
            2.0 / PI,
            1e-8,
        ),
        close(
            s,
            "Gamma(2) from its exponential integral".into(),
            integrate(
                |t: f64| (2.0 * t - t.exp()).exp(),
                f64::NEG_INFINITY,
                f64::INFINITY,
                cfg,
            )
            .map(|r| r.value),
            1.0,
            1e-8,
        ),
    ]
}

fn fisher_checks(cfg: &QuadratureConfig) -> Vec<Check> {
    let mut out = Vec::new();
    let models = [
        ModelSpec::new(ModelId::ChiSquaredLog),
        ModelSpec::gaussian(2.0).expect("valid sigma"),
        ModelSpec::new(ModelId::TrigTranslational),
        ModelSpec::new(ModelId::BinomialTrigIRF),
    ];
    for model in models {
        let want = model.fisher();
        match fisher_report(&model, &default_probes(&model, 5), cfg) {
            Ok(r) => {
                for (form, got) in [
                    ("gradient", r.gradient_form),
                    ("curvature", r.curvature_form),
                ] {
                    out.push(close(
                        Suite::Fisher,
                        format!("{} {form} form", model.id),
                        Ok(got),
                        want,
                        1e-5,
                    ));
                }
                out.push(Check {
                    suite: Suite::Fisher,
                    name: format!("{} forms agree and are xi-independent", model.id),
                    passed: r.max_form_discrepancy <= 1e-5 && r.max_xi_variation <= 1e-5,
                    detail: format!(
                        "max discrepancy {:.3e}, max xi variation {:.3e}",
                        r.max_form_discrepancy, r.max_xi_variation
                    ),
                });
            }
            Err(e) => out.push(Check {
                suite: Suite::Fisher,
                name: format!("{} Fisher report", model.id),
                passed: false,
                detail: format!("error: {e}"),
            }),
        }
    }
    out
}

fn h_checks(cfg: &QuadratureConfig) -> Vec<Check> {
    let mut out = Vec::new();
    let models = [
        ModelSpec::new(ModelId::ChiSquaredLog),
        ModelSpec::gaussian(1.0).expect("valid sigma"),
        ModelSpec::new(ModelId::TrigTranslational),
    ];
    for model in models {
        let deltas = [-1.3, -0.6, -0.1, 0.25, 0.7, 1.2];
        let worst = deltas.iter().try_fold(0.0_f64, |acc, &d| -> Result<f64> {
            let q = h_functional(&model, d, cfg)?.value;
            Ok(acc.max((q - h_closed_form(&model, d)?).abs()))
        });
        out.push(close(
            Suite::H,
            format!("{} quadrature H matches closed form", model.id),
            worst,
            0.0,
            1e-7,
        ));
        let nonpositive = (-50..=50).try_fold(true, |ok, k| -> Result<bool> {
            let d = k as f64 * 0.03;
            let v = h_functional(&model, d, cfg)?.value;
            Ok(ok && if k == 0 { v == 0.0 } else { v < 0.0 })
        });
        out.push(Check {
            suite: Suite::H,
            name: format!("{} H <= 0 with equality only at 0", model.id),
            passed: matches!(nonpositive, Ok(true)),
            detail: format!("{nonpositive:?} on 101 offsets in [-1.5, 1.5]"),
        });
    }
    let trig = ModelSpec::new(ModelId::TrigTranslational);
    for (order, want) in [(1u32, 0.0), (2, -4.0), (3, 0.0), (4, 16.0)] {
        let tol = if order <= 2 { 1e-5 } else { 1e-3 };
        out.push(close(
            Suite::H,
            format!("trig numeric H derivative of order {order} at 0"),
            h_derivative_numeric(&trig, order, 0.0, cfg),
            want,
            tol,
        ));
    }
    out
}

fn table1_checks(cfg: &QuadratureConfig) -> Vec<Check> {
    let golden: Vec<(u64, f64)> = TABLE1_GOLDEN
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let (n, r) = l.split_once(',').expect("golden rows have two columns");
            (
                n.trim().parse().expect("golden N"),
                r.trim().parse().expect("golden ratio"),
            )
        })
        .collect();
    let chi = ModelSpec::new(ModelId::ChiSquaredLog);
    let ns: Vec<u64> = golden.iter().map(|g| g.0).collect();
    match table_rows(&chi, &ns, cfg) {
        Ok(rows) => rows
            .iter()
            .zip(&golden)
            .map(|(row, &(n, want))| Check {
                suite: Suite::Table1,
                name: format!("chi2log N = {n}"),
                passed: (row.ratio_3dp - want).abs() < 5e-7,
                detail: format!("{:.3} vs published {want:.3}", row.ratio_3dp),
            })
            .collect(),
        Err(e) => vec![Check {
            suite: Suite::Table1,
            name: "table rows".into(),
            passed: false,
            detail: format!("error: {e}"),
        }],
    }
}

/// Runs the selected suites (all of them when `suites` is empty).
pub fn run(suites: &[Suite], cfg: &QuadratureConfig) -> VerifyReport {
    let selected: Vec<Suite> = if suites.is_empty() {
        Suite::ALL.to_vec()
    } else {
        suites.to_vec()
    };
    let mut checks = Vec::new();
    for suite in selected {
        checks.extend(match suite {
            Suite::Quadrature => quadrature_checks(cfg),
            Suite::Fisher => fisher_checks(cfg),
            Suite::H => h_checks(cfg),
            Suite::Table1 => table1_checks(cfg),
        });
    }
    VerifyReport { checks }
}
