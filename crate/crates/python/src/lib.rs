//! Python bindings: `import lethargy_py`.

use std::cell::RefCell;

use lethargy::certifier::{self, Verdict};
use lethargy::cli::{self, config};
use lethargy::minimax::{self, MinimaxResult};
use lethargy::{AlternationCertificate, EnvelopeMode, Interval, LethargyFunction, SchemeProfile};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

create_exception!(lethargy_py, LethargyError, PyValueError);

fn to_py(e: lethargy::Error) -> PyErr {
    LethargyError::new_err(e.to_string())
}

/// Materialize `eps_0..=eps_{n_max}` from a description such as `power:0.5`,
/// `log`, `geometric:1.1` or `file:PATH`.
#[pyfunction]
fn materialize(spec: &str, n_max: usize) -> PyResult<Vec<f64>> {
    config::parse_eps(spec).and_then(|s| s.materialize(n_max)).map_err(to_py)
}

#[pyclass(name = "Scheme", module = "lethargy_py", frozen, from_py_object)]
#[derive(Clone)]
struct PyScheme {
    inner: SchemeProfile,
}

#[pymethods]
impl PyScheme {
    #[staticmethod]
    fn polynomial() -> Self {
        PyScheme { inner: SchemeProfile::polynomial() }
    }

    #[staticmethod]
    #[pyo3(signature = (degrees, alternation = None))]
    fn rational(degrees: Vec<(usize, usize)>, alternation: Option<Vec<usize>>) -> PyResult<Self> {
        let mut inner = SchemeProfile::rational(degrees).map_err(to_py)?;
        if let Some(counts) = alternation {
            inner = inner.with_alternation(counts).map_err(to_py)?;
        }
        Ok(PyScheme { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (base = None))]
    fn spline(base: Option<PyScheme>) -> Self {
        let base = base.map_or_else(SchemeProfile::polynomial, |b| b.inner);
        PyScheme { inner: SchemeProfile::free_knot_spline(base) }
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    #[getter]
    fn is_haar(&self) -> bool {
        self.inner.is_haar()
    }

    #[getter]
    fn is_linear(&self) -> bool {
        self.inner.is_linear()
    }

    /// Sign changes required at level `n`.
    fn phi(&self, n: usize) -> PyResult<usize> {
        self.inner.phi(n).map_err(to_py)
    }

    fn k_map(&self, n: usize) -> usize {
        self.inner.k_map(n)
    }

    fn __repr__(&self) -> String {
        format!("Scheme({})", self.inner.name)
    }
}

#[pyclass(name = "Certificate", module = "lethargy_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyCertificate {
    inner: AlternationCertificate,
}

#[pymethods]
impl PyCertificate {
    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn m_n(&self) -> usize {
        self.inner.m_n
    }

    #[getter]
    fn target(&self) -> f64 {
        self.inner.target
    }

    #[getter]
    fn floor(&self) -> f64 {
        self.inner.floor
    }

    #[getter]
    fn points(&self) -> Vec<f64> {
        self.inner.points.clone()
    }

    #[getter]
    fn signs(&self) -> Vec<i8> {
        self.inner.signs.clone()
    }

    #[getter]
    fn magnitudes(&self) -> Vec<f64> {
        self.inner.magnitudes.clone()
    }

    /// Copy with a different target, e.g. to probe strictness.
    fn with_target(&self, target: f64) -> Self {
        let mut inner = self.inner.clone();
        inner.target = target;
        PyCertificate { inner }
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(to_py)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        AlternationCertificate::from_json(text).map(|inner| PyCertificate { inner }).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "Certificate(n={}, points={}, floor={:e}, target={:e})",
            self.inner.n,
            self.inner.points.len(),
            self.inner.floor,
            self.inner.target
        )
    }
}

#[pyclass(name = "LethargyFunction", module = "lethargy_py", frozen)]
struct PyLethargy {
    inner: LethargyFunction,
}

#[pymethods]
impl PyLethargy {
    #[new]
    #[pyo3(signature = (eps, scheme = None, interval = (0.0, 1.0), envelope = "identity", verify_grid = 100_000))]
    fn new(
        eps: Vec<f64>,
        scheme: Option<PyScheme>,
        interval: (f64, f64),
        envelope: &str,
        verify_grid: usize,
    ) -> PyResult<Self> {
        let interval = Interval::new(interval.0, interval.1).map_err(to_py)?;
        let mode = config::parse_envelope(envelope).map_err(to_py)?;
        let profile = scheme.map_or_else(SchemeProfile::polynomial, |s| s.inner);
        LethargyFunction::build(eps, profile, interval, mode, verify_grid)
            .map(|inner| PyLethargy { inner })
            .map_err(to_py)
    }

    fn __call__(&self, t: f64) -> PyResult<f64> {
        self.inner.eval(t).map_err(to_py)
    }

    fn eval_many(&self, ts: Vec<f64>) -> PyResult<Vec<f64>> {
        ts.into_iter().map(|t| self.inner.eval(t).map_err(to_py)).collect()
    }

    #[getter]
    fn interval(&self) -> (f64, f64) {
        (self.inner.interval().a(), self.inner.interval().b())
    }

    #[getter]
    fn n_max(&self) -> usize {
        self.inner.n_max()
    }

    #[getter]
    fn u_max(&self) -> f64 {
        self.inner.u_max()
    }

    /// Relative containment deviation of the envelope actually in use.
    #[getter]
    fn containment(&self) -> f64 {
        self.inner.envelope().record().max_relative_deviation
    }

    #[getter]
    fn delta(&self) -> Option<f64> {
        match self.inner.envelope().mode() {
            EnvelopeMode::Identity => None,
            EnvelopeMode::Mollified { delta } => Some(delta),
        }
    }

    /// The smooth envelope `e(u)`.
    fn envelope(&self, u: f64) -> f64 {
        self.inner.envelope().eval(u)
    }

    /// The polygonal envelope `p(u)`.
    fn polygonal(&self, u: f64) -> f64 {
        self.inner.envelope().base().eval(u)
    }

    /// `(t, k, sign)` for every half-period point with `k/2 <= u_max`.
    #[pyo3(signature = (u_max = None))]
    fn candidate_points(&self, u_max: Option<f64>) -> Vec<(f64, u64, i8)> {
        self.inner
            .candidate_points(u_max.unwrap_or_else(|| self.inner.u_max()))
            .into_iter()
            .map(|c| (c.t, c.k, c.sign))
            .collect()
    }

    fn lift(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.lift(&x).map_err(to_py)
    }

    fn search(&self, n: usize) -> PyResult<PyCertificate> {
        certifier::search(&self.inner, n).map(|inner| PyCertificate { inner }).map_err(to_py)
    }

    fn certify_range(&self, lo: usize, hi: usize) -> PyResult<Vec<PyCertificate>> {
        let levels = certifier::certify_range(&self.inner, lo..=hi).map_err(to_py)?;
        Ok(levels.into_iter().map(|l| PyCertificate { inner: l.certificate }).collect())
    }

    fn check(&self, certificate: &PyCertificate) -> (bool, Option<String>) {
        verdict(certifier::check(|t| self.inner.value(t), self.inner.interval(), &certificate.inner))
    }
}

fn verdict(v: Verdict) -> (bool, Option<String>) {
    match v {
        Verdict::Valid => (true, None),
        Verdict::Invalid(reason) => (false, Some(reason.to_string())),
    }
}

/// Validate a certificate against any Python callable on `[a, b]`.
#[pyfunction]
fn check(func: &Bound<'_, PyAny>, a: f64, b: f64, certificate: &PyCertificate) -> PyResult<(bool, Option<String>)> {
    let domain = Interval::general(a, b).map_err(to_py)?;
    let failure: RefCell<Option<PyErr>> = RefCell::new(None);
    let result = certifier::check(
        |t| match func.call1((t,)).and_then(|v| v.extract::<f64>()) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        },
        domain,
        &certificate.inner,
    );
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(verdict(result)),
    }
}

#[pyclass(name = "MinimaxResult", module = "lethargy_py", frozen)]
struct PyMinimax {
    inner: MinimaxResult,
}

#[pymethods]
impl PyMinimax {
    #[getter]
    fn degree(&self) -> usize {
        self.inner.degree
    }

    #[getter]
    fn coefficients(&self) -> Vec<f64> {
        self.inner.coefficients().to_vec()
    }

    #[getter]
    fn error(&self) -> f64 {
        self.inner.error
    }

    #[getter]
    fn lower_bracket(&self) -> f64 {
        self.inner.lower_bracket
    }

    #[getter]
    fn converged(&self) -> bool {
        self.inner.converged
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations
    }

    #[getter]
    fn reference(&self) -> Vec<f64> {
        self.inner.reference.clone()
    }

    fn __call__(&self, t: f64) -> PyResult<f64> {
        self.inner.eval(t).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "MinimaxResult(degree={}, error={:e}, lower_bracket={:e}, converged={})",
            self.inner.degree, self.inner.error, self.inner.lower_bracket, self.inner.converged
        )
    }
}

/// Discrete best approximation of `func` by polynomials of degree `n` on a
/// uniform grid of `grid` points over `[a, b]`.
#[pyfunction]
#[pyo3(signature = (func, n, a = -1.0, b = 1.0, grid = 4001, tol = 1e-10))]
fn remez(func: &Bound<'_, PyAny>, n: usize, a: f64, b: f64, grid: usize, tol: f64) -> PyResult<PyMinimax> {
    let interval = Interval::general(a, b).map_err(to_py)?;
    let points = interval.uniform(grid);
    let values = points
        .iter()
        .map(|&t| func.call1((t,))?.extract::<f64>())
        .collect::<PyResult<Vec<f64>>>()?;
    minimax::remez_values(&values, n, interval, &points, tol)
        .map(|inner| PyMinimax { inner })
        .map_err(to_py)
}

/// Chebyshev series `Σ c_j T_j` evaluated at `t` in `[a, b]`.
#[pyfunction]
#[pyo3(signature = (coefficients, t, a = -1.0, b = 1.0))]
fn cheb_eval(coefficients: Vec<f64>, t: f64, a: f64, b: f64) -> PyResult<f64> {
    let interval = Interval::general(a, b).map_err(to_py)?;
    lethargy::cheb_eval(&coefficients, t, interval).map_err(to_py)
}

/// Run the command-line tool in-process. Returns `(exit_code, stdout, stderr)`.
#[pyfunction]
fn run(args: Vec<String>) -> (u8, String, String) {
    let mut stdout = Vec::new();
    let mut stderr = Vec::new();
    let argv = std::iter::once("lethargy".to_owned()).chain(args);
    let status = cli::main_with_args(argv, &mut stdout, &mut stderr);
    (
        status,
        String::from_utf8_lossy(&stdout).into_owned(),
        String::from_utf8_lossy(&stderr).into_owned(),
    )
}

#[pymodule]
pub fn lethargy_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("LethargyError", m.py().get_type::<LethargyError>())?;
    m.add_class::<PyScheme>()?;
    m.add_class::<PyCertificate>()?;
    m.add_class::<PyLethargy>()?;
    m.add_class::<PyMinimax>()?;
    m.add_function(wrap_pyfunction!(materialize, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(remez, m)?)?;
    m.add_function(wrap_pyfunction!(cheb_eval, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
