//! `gaussn`: command-line front end for the criterion library.

mod output;

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gaussn_core::criterion::{round_3dp, DEFAULT_THRESHOLD};
use gaussn_core::information::default_probes;
use gaussn_core::verify::{self, Suite};
use gaussn_core::{
    compare_to_gaussian, evaluate_criterion, fisher_report, gaussian_on_grid, minimal_n,
    ml_estimate, posterior_from_observations, prior_measure, sample, table_rows, Error, ModelId,
    ModelSpec, QuadratureConfig, RoundingMode, DEFAULT_GRID_SIZE, VERSION,
};
use serde_json::{json, Value};

use output::{fmt_f64, render_csv, render_json, OutputEnvelope};

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "gaussn",
    version,
    about = "Minimal sample size for a Gaussian posterior"
)]
struct Cli {
    /// Output format (default: csv for `table`, json otherwise).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Absolute and relative quadrature tolerance.
    #[arg(long, global = true, env = "GAUSSN_QUAD_TOL")]
    quad_tol: Option<f64>,

    /// Write the output to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct ModelArgs {
    /// chi2log, gauss, trig or binom.
    #[arg(long, value_parser = parse_model)]
    model: ModelId,

    /// Standard deviation of the Gaussian model.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
}

impl ModelArgs {
    fn spec(&self) -> Result<ModelSpec, Error> {
        ModelSpec::with_sigma(self.model, self.sigma)
    }

    fn record(&self, params: &mut BTreeMap<String, Value>) {
        if self.model == ModelId::GaussianShift {
            params.insert("sigma".into(), json!(self.sigma));
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Fisher information by both definitions, and the prior measure.
    Fisher {
        #[command(flatten)]
        model: ModelArgs,
        /// Parameter value to evaluate at (default: the model's probe grid).
        #[arg(long, allow_hyphen_values = true)]
        xi: Option<f64>,
    },
    /// Minimal N passing the remainder criterion.
    Criterion {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
        #[arg(long, value_parser = parse_mode, default_value = "paper_rounding")]
        mode: RoundingMode,
    },
    /// Remainder ratio for a list of sample sizes.
    Table {
        #[command(flatten)]
        model: ModelArgs,
        /// Comma-separated sample sizes, e.g. 3,10,100.
        #[arg(long, value_delimiter = ',', required = true, value_parser = clap::value_parser!(u64).range(1..))]
        n: Vec<u64>,
    },
    /// Posterior from simulated data compared with its Gaussian approximation.
    Posterior {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, allow_hyphen_values = true)]
        xi_true: f64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_GRID_SIZE)]
        grid_size: usize,
    },
    /// Run the built-in consistency checks.
    Verify {
        /// quadrature, fisher, h or table1 (repeatable; default: all).
        #[arg(long, value_parser = parse_suite)]
        suite: Vec<Suite>,
    },
}

fn parse_model(s: &str) -> Result<ModelId, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_mode(s: &str) -> Result<RoundingMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// What a command produced: the bytes to emit and whether checks passed.
struct Outcome {
    bytes: Vec<u8>,
    verified: bool,
}

impl Outcome {
    fn ok(bytes: Vec<u8>) -> Self {
        Self {
            bytes,
            verified: true,
        }
    }
}

fn envelope(
    command: &str,
    model: &str,
    parameters: BTreeMap<String, Value>,
    results: Value,
) -> OutputEnvelope {
    OutputEnvelope {
        command: command.into(),
        model: model.into(),
        parameters,
        results,
        tool_version: VERSION.into(),
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn run(cli: &Cli) -> Result<Outcome, Error> {
    let cfg = match cli.quad_tol {
        Some(tol) => QuadratureConfig::with_tolerance(tol),
        None => QuadratureConfig::default(),
    };
    cfg.validate()?;
    let mut params = BTreeMap::new();
    if let Some(tol) = cli.quad_tol {
        params.insert("quad_tol".into(), json!(tol));
    }
    let format = cli.format.unwrap_or(match cli.command {
        Command::Table { .. } => Format::Csv,
        _ => Format::Json,
    });

    match &cli.command {
        Command::Fisher { model, xi } => {
            let spec = model.spec()?;
            model.record(&mut params);
            let probes = match xi {
                Some(x) => {
                    params.insert("xi".into(), json!(x));
                    vec![*x]
                }
                None => default_probes(&spec, 10),
            };
            let report = fisher_report(&spec, &probes, &cfg)?;
            let prior = prior_measure(&spec);
            if format == Format::Csv {
                return Ok(Outcome::ok(render_csv(
                    &[
                        "xi",
                        "gradient_form",
                        "curvature_form",
                        "discrepancy",
                        "prior_measure",
                    ],
                    &[vec![
                        fmt_f64(probes[0]),
                        fmt_f64(report.gradient_form),
                        fmt_f64(report.curvature_form),
                        fmt_f64((report.gradient_form - report.curvature_form).abs()),
                        fmt_f64(prior),
                    ]],
                )));
            }
            let results = json!({
                "gradient_form": report.gradient_form,
                "curvature_form": report.curvature_form,
                "discrepancy": (report.gradient_form - report.curvature_form).abs(),
                "max_form_discrepancy": report.max_form_discrepancy,
                "max_xi_variation": report.max_xi_variation,
                "xi_probe_values": report.xi_probe_values,
                "analytic_fisher": spec.fisher(),
                "prior_measure": prior,
            });
            Ok(Outcome::ok(render_json(&envelope(
                "fisher",
                model.model.short_name(),
                params,
                results,
            ))))
        }
        Command::Criterion {
            model,
            threshold,
            mode,
        } => {
            let spec = model.spec()?;
            model.record(&mut params);
            params.insert("threshold".into(), json!(threshold));
            params.insert("mode".into(), json!(mode.to_string()));
            let report = minimal_n(&spec, *threshold, *mode, &cfg)?;
            if format == Format::Csv {
                return Ok(Outcome::ok(render_csv(
                    &[
                        "minimal_n",
                        "ratio",
                        "ratio_3dp",
                        "remainder_order",
                        "h_max",
                        "halfwidth",
                        "passes",
                    ],
                    &[vec![
                        report.n.to_string(),
                        fmt_f64(report.ratio),
                        format!("{:.3}", round_3dp(report.ratio)),
                        report.remainder_order.to_string(),
                        fmt_f64(report.h_max),
                        fmt_f64(report.halfwidth),
                        report.passes.to_string(),
                    ]],
                )));
            }
            let results = json!({ "minimal_n": report.n, "report": to_value(&report) });
            Ok(Outcome::ok(render_json(&envelope(
                "criterion",
                model.model.short_name(),
                params,
                results,
            ))))
        }
        Command::Table { model, n } => {
            let spec = model.spec()?;
            model.record(&mut params);
            params.insert("n".into(), json!(n));
            let rows = table_rows(&spec, n, &cfg)?;
            if format == Format::Csv {
                let cells: Vec<Vec<String>> = rows
                    .iter()
                    .map(|r| {
                        vec![
                            r.n.to_string(),
                            fmt_f64(r.ratio_raw),
                            format!("{:.3}", r.ratio_3dp),
                        ]
                    })
                    .collect();
                return Ok(Outcome::ok(render_csv(
                    &["N", "ratio_raw", "ratio_3dp"],
                    &cells,
                )));
            }
            let results = json!({ "rows": to_value(&rows) });
            Ok(Outcome::ok(render_json(&envelope(
                "table",
                model.model.short_name(),
                params,
                results,
            ))))
        }
        Command::Posterior {
            model,
            xi_true,
            n,
            seed,
            grid_size,
        } => {
            let spec = model.spec()?;
            model.record(&mut params);
            params.insert("xi_true".into(), json!(xi_true));
            params.insert("n".into(), json!(n));
            params.insert("seed".into(), json!(seed));
            params.insert("grid_size".into(), json!(grid_size));
            let count = *n as usize;
            let obs = sample(&spec, *xi_true, count, *seed)?;
            let ml = ml_estimate(&spec, &obs)?;
            let post = posterior_from_observations(&spec, &obs, *grid_size)?;
            let reference = gaussian_on_grid(ml.xi, spec.fisher(), count, post.xi_values.clone())?;
            let cmp = compare_to_gaussian(&post, &reference)?;
            if format == Format::Csv {
                let cells: Vec<Vec<String>> = post
                    .xi_values
                    .iter()
                    .zip(post.densities.iter().zip(&reference.densities))
                    .map(|(x, (p, g))| vec![fmt_f64(*x), fmt_f64(*p), fmt_f64(*g)])
                    .collect();
                return Ok(Outcome::ok(render_csv(
                    &["xi", "density", "gaussian_density"],
                    &cells,
                )));
            }
            let criterion =
                evaluate_criterion(&spec, *n, DEFAULT_THRESHOLD, RoundingMode::default(), &cfg)?;
            let results = json!({
                "ml_estimate": to_value(&ml),
                "comparison": to_value(&cmp),
                "posterior_mean": post.mean(),
                "posterior_std": post.std_dev(),
                "gaussian_std": reference.std_dev(),
                "criterion": to_value(&criterion),
                "passes": criterion.passes,
            });
            Ok(Outcome::ok(render_json(&envelope(
                "posterior",
                model.model.short_name(),
                params,
                results,
            ))))
        }
        Command::Verify { suite } => {
            let names: Vec<&str> = suite.iter().map(|s| s.name()).collect();
            params.insert("suites".into(), json!(names));
            let report = verify::run(suite, &cfg);
            let selected = if suite.is_empty() {
                Suite::ALL.to_vec()
            } else {
                suite.clone()
            };
            for s in selected {
                let (passed, total) = report.count(s);
                eprintln!("{s}: {passed}/{total} checks passed");
            }
            for c in report.failures() {
                eprintln!("FAILED {} / {}: {}", c.suite, c.name, c.detail);
            }
            let bytes = if format == Format::Csv {
                let cells: Vec<Vec<String>> = report
                    .checks
                    .iter()
                    .map(|c| {
                        vec![
                            c.suite.to_string(),
                            c.name.clone(),
                            c.passed.to_string(),
                            c.detail.clone(),
                        ]
                    })
                    .collect();
                render_csv(&["suite", "name", "passed", "detail"], &cells)
            } else {
                let results =
                    json!({ "passed": report.passed(), "checks": to_value(&report.checks) });
                render_json(&envelope("verify", "all", params, results))
            };
            Ok(Outcome {
                bytes,
                verified: report.passed(),
            })
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Input(_) | Error::Unsupported(_) => EXIT_USAGE,
        Error::Quadrature { .. } | Error::Numerical(_) => EXIT_NUMERICAL,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            let written = match &cli.out {
                Some(path) => fs::write(path, &outcome.bytes),
                None => std::io::Write::write_all(&mut std::io::stdout().lock(), &outcome.bytes),
            };
            if let Err(e) = written {
                eprintln!("error: cannot write output: {e}");
                return ExitCode::from(EXIT_USAGE);
            }
            if outcome.verified {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_VERIFY_FAILED)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
