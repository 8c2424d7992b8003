//! Python bindings for `onebit-core`.
//!
//! Vectors cross the boundary as lists of floats and matrices as lists of
//! rows. Random generators are addressed by integer seed.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use onebit_core::experiments::{self, SweepConfig};
use onebit_core::recovery::{self, RecoveryConfig};
use onebit_core::{metrics, rng, signal_model, Error, Matrix};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn matrix(rows: Vec<Vec<f64>>) -> PyResult<Matrix> {
    Matrix::from_rows(&rows).map_err(to_py)
}

fn py_bool(b: bool) -> &'static str {
    if b {
        "True"
    } else {
        "False"
    }
}

fn config(tau: f64, max_iters: usize, tol: f64) -> RecoveryConfig {
    RecoveryConfig { tau, max_iters, tol }
}

#[pyclass(name = "SparseSignal", frozen, get_all)]
struct PySparseSignal {
    values: Vec<f64>,
    support: Vec<usize>,
    k: usize,
}

#[pyclass(name = "RecoveryResult", frozen, get_all)]
struct PyRecoveryResult {
    estimate: Vec<f64>,
    iterations: usize,
    converged: bool,
    consistent: bool,
    degenerate: bool,
}

#[pymethods]
impl PyRecoveryResult {
    fn __repr__(&self) -> String {
        format!(
            "RecoveryResult(iterations={}, converged={}, consistent={}, degenerate={})",
            self.iterations,
            py_bool(self.converged),
            py_bool(self.consistent),
            py_bool(self.degenerate)
        )
    }
}

impl From<recovery::RecoveryResult> for PyRecoveryResult {
    fn from(r: recovery::RecoveryResult) -> Self {
        Self {
            estimate: r.estimate,
            iterations: r.iterations,
            converged: r.converged,
            consistent: r.consistent,
            degenerate: r.degenerate,
        }
    }
}

/// Output of `run_sweep`.
#[pyclass(name = "SweepResult", frozen)]
struct PySweepResult {
    inner: experiments::SweepResult,
}

#[pymethods]
impl PySweepResult {
    /// Rows as `(m, variant, param_name, param_value, mean_mse, sem_mse,
    /// mean_consistency, mean_support_recall, mean_iters, degenerate_count)`.
    #[allow(clippy::type_complexity)]
    fn rows(&self) -> Vec<(usize, String, String, f64, f64, f64, f64, f64, f64, usize)> {
        self.inner
            .rows
            .iter()
            .map(|r| {
                (
                    r.m,
                    r.variant.clone(),
                    r.param_name.clone(),
                    r.param_value,
                    r.mean_mse,
                    r.sem_mse,
                    r.mean_consistency,
                    r.mean_support_recall,
                    r.mean_iters,
                    r.degenerate_count,
                )
            })
            .collect()
    }

    fn to_csv(&self) -> String {
        String::from_utf8(experiments::csv_bytes(&self.inner)).expect("csv output is utf-8")
    }

    fn to_svg(&self) -> PyResult<String> {
        experiments::render_svg(&self.inner).map_err(to_py)
    }

    fn __len__(&self) -> usize {
        self.inner.rows.len()
    }
}

#[pyfunction]
fn generate_signal(n: usize, k: usize, seed: u64) -> PyResult<PySparseSignal> {
    let s = signal_model::generate_signal(n, k, &mut rng::stream(seed)).map_err(to_py)?;
    Ok(PySparseSignal { values: s.values, support: s.support, k: s.k })
}

#[pyfunction]
fn generate_matrix(m: usize, n: usize, seed: u64) -> PyResult<Vec<Vec<f64>>> {
    Ok(signal_model::generate_matrix(m, n, &mut rng::stream(seed)).map_err(to_py)?.to_rows())
}

#[pyfunction]
fn measure(matrix_rows: Vec<Vec<f64>>, x: Vec<f64>) -> PyResult<Vec<f64>> {
    signal_model::measure(&matrix(matrix_rows)?, &x).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (support, rho, n, seed, with_false_positives = false))]
fn make_support_estimate(
    support: Vec<usize>,
    rho: f64,
    n: usize,
    seed: u64,
    with_false_positives: bool,
) -> PyResult<Vec<usize>> {
    signal_model::make_support_estimate(&support, rho, with_false_positives, n, &mut rng::stream(seed))
        .map(|e| e.indices)
        .map_err(to_py)
}

#[pyfunction]
fn prune(z: Vec<f64>, k: usize) -> PyResult<Vec<f64>> {
    recovery::prune(&z, k).map_err(to_py)
}

#[pyfunction]
fn biht_step(x: Vec<f64>, matrix_rows: Vec<Vec<f64>>, y: Vec<f64>, tau: f64) -> PyResult<Vec<f64>> {
    recovery::biht_step(&x, &matrix(matrix_rows)?, &y, tau).map_err(to_py)
}

#[pyfunction]
fn build_weights(estimate: Vec<usize>, rho: f64, n: usize) -> PyResult<Vec<f64>> {
    recovery::build_weights(&estimate, rho, n).map(|w| w.into_inner()).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (matrix_rows, y, k, tau = 1e-3, max_iters = 1000, tol = 1e-10))]
fn biht(matrix_rows: Vec<Vec<f64>>, y: Vec<f64>, k: usize, tau: f64, max_iters: usize, tol: f64) -> PyResult<PyRecoveryResult> {
    let a = matrix(matrix_rows)?;
    recovery::biht(&a, &y, k, &config(tau, max_iters, tol)).map(Into::into).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (matrix_rows, y, estimate, c = 0.0, tau = 1e-3, max_iters = 1000, tol = 1e-10))]
fn biht_oracle(
    matrix_rows: Vec<Vec<f64>>,
    y: Vec<f64>,
    estimate: Vec<usize>,
    c: f64,
    tau: f64,
    max_iters: usize,
    tol: f64,
) -> PyResult<PyRecoveryResult> {
    let a = matrix(matrix_rows)?;
    recovery::biht_oracle(&a, &y, &estimate, c, &config(tau, max_iters, tol)).map(Into::into).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (matrix_rows, y, k, estimate, rho, tau = 1e-3, max_iters = 1000, tol = 1e-10))]
#[allow(clippy::too_many_arguments)]
fn biht_fourset(
    matrix_rows: Vec<Vec<f64>>,
    y: Vec<f64>,
    k: usize,
    estimate: Vec<usize>,
    rho: f64,
    tau: f64,
    max_iters: usize,
    tol: f64,
) -> PyResult<PyRecoveryResult> {
    let a = matrix(matrix_rows)?;
    recovery::biht_fourset(&a, &y, k, &estimate, rho, &config(tau, max_iters, tol)).map(Into::into).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (matrix_rows, y, k, estimate, rho, tau = 1e-3, max_iters = 1000, tol = 1e-10))]
#[allow(clippy::too_many_arguments)]
fn biht_psw(
    matrix_rows: Vec<Vec<f64>>,
    y: Vec<f64>,
    k: usize,
    estimate: Vec<usize>,
    rho: f64,
    tau: f64,
    max_iters: usize,
    tol: f64,
) -> PyResult<PyRecoveryResult> {
    let a = matrix(matrix_rows)?;
    recovery::biht_psw(&a, &y, k, &estimate, rho, &config(tau, max_iters, tol)).map(Into::into).map_err(to_py)
}

/// Unsupervised re-weighting. With `initial_support` given, the loop starts
/// from it instead of a BIHT run (oracle-weight benchmark).
#[pyfunction]
#[pyo3(signature = (matrix_rows, y, k, lambda_, n_rw, initial_support = None, tau = 1e-3, max_iters = 1000, tol = 1e-10))]
#[allow(clippy::too_many_arguments)]
fn biht_urw(
    matrix_rows: Vec<Vec<f64>>,
    y: Vec<f64>,
    k: usize,
    lambda_: f64,
    n_rw: usize,
    initial_support: Option<Vec<usize>>,
    tau: f64,
    max_iters: usize,
    tol: f64,
) -> PyResult<PyRecoveryResult> {
    let a = matrix(matrix_rows)?;
    let cfg = config(tau, max_iters, tol);
    match initial_support {
        Some(s) => recovery::biht_urw_from_support(&a, &y, k, &s, lambda_, n_rw, &cfg),
        None => recovery::biht_urw(&a, &y, k, lambda_, n_rw, &cfg),
    }
    .map(Into::into)
    .map_err(to_py)
}

#[pyfunction]
fn mse(x: Vec<f64>, x_hat: Vec<f64>) -> PyResult<f64> {
    metrics::mse(&x, &x_hat).map_err(to_py)
}

#[pyfunction]
fn sign_consistency(matrix_rows: Vec<Vec<f64>>, x_hat: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    metrics::sign_consistency(&matrix(matrix_rows)?, &x_hat, &y).map_err(to_py)
}

#[pyfunction]
fn support_recall(support: Vec<usize>, x_hat: Vec<f64>) -> PyResult<f64> {
    metrics::support_recall(&support, &x_hat).map_err(to_py)
}

/// JSON text of a bundled figure configuration.
#[pyfunction]
#[pyo3(signature = (name, trials = 100, seed = 0))]
fn figure_config(name: &str, trials: usize, seed: u64) -> PyResult<String> {
    let cfg = experiments::figure_config(name, trials, seed).map_err(to_py)?;
    serde_json::to_string_pretty(&cfg).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Run a sweep from its JSON configuration. The GIL is released while the
/// trials run.
#[pyfunction]
#[pyo3(signature = (config_json, workers = None))]
fn run_sweep(py: Python<'_>, config_json: &str, workers: Option<usize>) -> PyResult<PySweepResult> {
    let cfg = SweepConfig::from_json(config_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let inner = py
        .detach(|| experiments::run_sweep_with_workers(&cfg, workers))
        .map_err(to_py)?;
    Ok(PySweepResult { inner })
}

#[pymodule]
fn onebit_cs(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", onebit_core::VERSION)?;
    m.add_class::<PySparseSignal>()?;
    m.add_class::<PyRecoveryResult>()?;
    m.add_class::<PySweepResult>()?;
    m.add_function(wrap_pyfunction!(generate_signal, m)?)?;
    m.add_function(wrap_pyfunction!(generate_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(measure, m)?)?;
    m.add_function(wrap_pyfunction!(make_support_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(prune, m)?)?;
    m.add_function(wrap_pyfunction!(biht_step, m)?)?;
    m.add_function(wrap_pyfunction!(build_weights, m)?)?;
    m.add_function(wrap_pyfunction!(biht, m)?)?;
    m.add_function(wrap_pyfunction!(biht_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(biht_fourset, m)?)?;
    m.add_function(wrap_pyfunction!(biht_psw, m)?)?;
    m.add_function(wrap_pyfunction!(biht_urw, m)?)?;
    m.add_function(wrap_pyfunction!(mse, m)?)?;
    m.add_function(wrap_pyfunction!(sign_consistency, m)?)?;
    m.add_function(wrap_pyfunction!(support_recall, m)?)?;
    m.add_function(wrap_pyfunction!(figure_config, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    Ok(())
}
