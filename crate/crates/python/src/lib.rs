//! Python bindings for `gaussn-core`.
//!
//! Errors map onto built-in exceptions: invalid input raises `ValueError`,
//! unsupported operations raise `NotImplementedError`, and quadrature or
//! other numerical failures raise `ArithmeticError`.

use gaussn_core as core;
use gaussn_core::{Error, ModelId, ModelSpec, QuadratureConfig, RoundingMode};
use pyo3::exceptions::{PyArithmeticError, PyNotImplementedError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Input(_) => PyValueError::new_err(e.to_string()),
        Error::Unsupported(_) => PyNotImplementedError::new_err(e.to_string()),
        Error::Quadrature { .. } | Error::Numerical(_) => PyArithmeticError::new_err(e.to_string()),
    }
}

fn config(quad_tol: Option<f64>) -> PyResult<QuadratureConfig> {
    let cfg = quad_tol.map_or_else(QuadratureConfig::default, QuadratureConfig::with_tolerance);
    cfg.validate().map_err(py_err)?;
    Ok(cfg)
}

fn mode(name: &str) -> PyResult<RoundingMode> {
    name.parse().map_err(py_err)
}

/// A translation-invariant model: `chi2log`, `gauss`, `trig` or `binom`.
#[pyclass(name = "Model", frozen, from_py_object)]
#[derive(Clone)]
struct PyModel {
    spec: ModelSpec,
}

#[pymethods]
impl PyModel {
    #[new]
    #[pyo3(signature = (name, sigma = None))]
    fn new(name: &str, sigma: Option<f64>) -> PyResult<Self> {
        let id: ModelId = name.parse().map_err(py_err)?;
        let spec = match sigma {
            Some(s) => ModelSpec::with_sigma(id, s),
            None => Ok(ModelSpec::new(id)),
        }
        .map_err(py_err)?;
        Ok(Self { spec })
    }

    #[getter]
    fn name(&self) -> &'static str {
        self.spec.id.short_name()
    }

    #[getter]
    fn sigma(&self) -> f64 {
        self.spec.sigma_param
    }

    /// Fisher information per observation.
    #[getter]
    fn fisher(&self) -> f64 {
        self.spec.fisher()
    }

    fn density(&self, x: f64, xi: f64) -> PyResult<f64> {
        core::density(&self.spec, x, xi).map_err(py_err)
    }

    /// `n` reproducible draws at `xi_true`.
    fn sample(&self, xi_true: f64, n: usize, seed: u64) -> PyResult<Vec<f64>> {
        let obs = core::sample(&self.spec, xi_true, n, seed).map_err(py_err)?;
        Ok(obs.values().to_vec())
    }

    fn ml_estimate(&self, values: Vec<f64>) -> PyResult<f64> {
        let obs = core::Observations::new(&self.spec, values).map_err(py_err)?;
        Ok(core::ml_estimate(&self.spec, &obs).map_err(py_err)?.xi)
    }

    fn __repr__(&self) -> String {
        format!(
            "Model('{}', sigma={})",
            self.spec.id.short_name(),
            self.spec.sigma_param
        )
    }
}

/// Gradient and curvature forms of the Fisher information at `xi`.
#[pyfunction]
#[pyo3(signature = (model, xi = 0.0, quad_tol = None))]
fn fisher(model: &PyModel, xi: f64, quad_tol: Option<f64>) -> PyResult<(f64, f64)> {
    let cfg = config(quad_tol)?;
    let g = core::fisher_gradient_form(&model.spec, xi, &cfg).map_err(py_err)?;
    let c = core::fisher_curvature_form(&model.spec, xi, &cfg).map_err(py_err)?;
    Ok((g, c))
}

/// `H(delta)` by quadrature, or from the closed form when `closed_form` is set.
#[pyfunction]
#[pyo3(signature = (model, delta, closed_form = false, quad_tol = None))]
fn h(model: &PyModel, delta: f64, closed_form: bool, quad_tol: Option<f64>) -> PyResult<f64> {
    if closed_form {
        return core::h_closed_form(&model.spec, delta).map_err(py_err);
    }
    core::h_value(&model.spec, delta, &config(quad_tol)?).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (model, n, quad_tol = None))]
fn remainder_ratio(model: &PyModel, n: u64, quad_tol: Option<f64>) -> PyResult<f64> {
    core::remainder_ratio(&model.spec, n, &config(quad_tol)?).map_err(py_err)
}

fn report_dict<'py>(py: Python<'py>, r: &core::CriterionReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("model", r.model.short_name())?;
    d.set_item("n", r.n)?;
    d.set_item("fisher", r.fisher)?;
    d.set_item("sigma", r.sigma)?;
    d.set_item("halfwidth", r.halfwidth)?;
    d.set_item("remainder_order", r.remainder_order)?;
    d.set_item("h_max", r.h_max)?;
    d.set_item("ratio", r.ratio)?;
    d.set_item("threshold", r.threshold)?;
    d.set_item("mode", r.mode.to_string())?;
    d.set_item("passes", r.passes)?;
    Ok(d)
}

/// Criterion report at a given `n`.
#[pyfunction]
#[pyo3(signature = (model, n, threshold = 0.1, mode = "paper_rounding", quad_tol = None))]
fn criterion<'py>(
    py: Python<'py>,
    model: &PyModel,
    n: u64,
    threshold: f64,
    mode: &str,
    quad_tol: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let r = core::evaluate_criterion(
        &model.spec,
        n,
        threshold,
        self::mode(mode)?,
        &config(quad_tol)?,
    )
    .map_err(py_err)?;
    report_dict(py, &r)
}

/// Report for the smallest passing `n`.
#[pyfunction]
#[pyo3(signature = (model, threshold = 0.1, mode = "paper_rounding", quad_tol = None))]
fn minimal_n<'py>(
    py: Python<'py>,
    model: &PyModel,
    threshold: f64,
    mode: &str,
    quad_tol: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let r = core::minimal_n(
        &model.spec,
        threshold,
        self::mode(mode)?,
        &config(quad_tol)?,
    )
    .map_err(py_err)?;
    report_dict(py, &r)
}

/// `(n, ratio_raw, ratio_3dp)` rows.
#[pyfunction]
#[pyo3(signature = (model, ns, quad_tol = None))]
fn table(model: &PyModel, ns: Vec<u64>, quad_tol: Option<f64>) -> PyResult<Vec<(u64, f64, f64)>> {
    let rows = core::table_rows(&model.spec, &ns, &config(quad_tol)?).map_err(py_err)?;
    Ok(rows
        .iter()
        .map(|r| (r.n, r.ratio_raw, r.ratio_3dp))
        .collect())
}

/// Posterior from observations on the default grid, as `(xi, density)`.
#[pyfunction]
#[pyo3(signature = (model, values, grid_size = core::DEFAULT_GRID_SIZE))]
fn posterior(
    model: &PyModel,
    values: Vec<f64>,
    grid_size: usize,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let obs = core::Observations::new(&model.spec, values).map_err(py_err)?;
    let post = core::posterior_from_observations(&model.spec, &obs, grid_size).map_err(py_err)?;
    Ok((post.xi_values, post.densities))
}

/// Posterior from observations compared with its Gaussian approximation.
#[pyfunction]
#[pyo3(signature = (model, values, grid_size = core::DEFAULT_GRID_SIZE))]
fn compare_to_gaussian<'py>(
    py: Python<'py>,
    model: &PyModel,
    values: Vec<f64>,
    grid_size: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let spec = &model.spec;
    let n = values.len();
    let obs = core::Observations::new(spec, values).map_err(py_err)?;
    let ml = core::ml_estimate(spec, &obs).map_err(py_err)?.xi;
    let post = core::posterior_from_observations(spec, &obs, grid_size).map_err(py_err)?;
    let reference =
        core::gaussian_on_grid(ml, spec.fisher(), n, post.xi_values.clone()).map_err(py_err)?;
    let cmp = core::compare_to_gaussian(&post, &reference).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("ml_estimate", ml)?;
    d.set_item("sup_log_deviation", cmp.sup_log_deviation)?;
    d.set_item("kl_to_gaussian", cmp.kl_to_gaussian)?;
    d.set_item("interval", cmp.interval)?;
    Ok(d)
}

/// Runs the built-in checks and returns `(all_passed, [(suite, name, passed, detail)])`.
#[pyfunction]
#[pyo3(signature = (suites = None, quad_tol = None))]
#[allow(clippy::type_complexity)]
fn verify(
    suites: Option<Vec<String>>,
    quad_tol: Option<f64>,
) -> PyResult<(bool, Vec<(String, String, bool, String)>)> {
    let suites = suites
        .unwrap_or_default()
        .iter()
        .map(|s| s.parse::<core::verify::Suite>())
        .collect::<core::Result<Vec<_>>>()
        .map_err(py_err)?;
    let report = core::verify::run(&suites, &config(quad_tol)?);
    let checks = report
        .checks
        .iter()
        .map(|c| {
            (
                c.suite.name().to_string(),
                c.name.clone(),
                c.passed,
                c.detail.clone(),
            )
        })
        .collect();
    Ok((report.passed(), checks))
}

#[pymodule]
fn gaussn(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", core::VERSION)?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(fisher, m)?)?;
    m.add_function(wrap_pyfunction!(h, m)?)?;
    m.add_function(wrap_pyfunction!(remainder_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(criterion, m)?)?;
    m.add_function(wrap_pyfunction!(minimal_n, m)?)?;
    m.add_function(wrap_pyfunction!(table, m)?)?;
    m.add_function(wrap_pyfunction!(posterior, m)?)?;
    m.add_function(wrap_pyfunction!(compare_to_gaussian, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
