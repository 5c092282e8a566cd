//! Python bindings for `hypocontract`.
//!
//! Errors map to three exception types that mirror the CLI exit classes:
//! `InputError` (a `ValueError`), `SchemeInapplicableError` and
//! `NumericalError` (an `ArithmeticError`).

use hypocontract::{self as hc, Error, ErrorClass, OperatorMatrix};
use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

create_exception!(hypocontract_py, InputError, PyValueError);
create_exception!(hypocontract_py, SchemeInapplicableError, PyValueError);
create_exception!(hypocontract_py, NumericalError, PyArithmeticError);

fn to_py(e: Error) -> PyErr {
    let msg = e.to_string();
    match e.class() {
        ErrorClass::Input => InputError::new_err(msg),
        ErrorClass::SchemeInapplicable => SchemeInapplicableError::new_err(msg),
        ErrorClass::Numerical => NumericalError::new_err(msg),
    }
}

/// Square complex matrix.
#[pyclass(name = "Matrix", frozen, from_py_object)]
#[derive(Clone)]
struct PyMatrix {
    inner: OperatorMatrix,
}

#[pymethods]
impl PyMatrix {
    /// Build from a list of rows of complex (or real) numbers.
    #[new]
    fn new(rows: Vec<Vec<Complex64>>) -> PyResult<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(to_py(Error::NotSquare {
                rows: n,
                cols: bad.len(),
            }));
        }
        let flat: Vec<Complex64> = rows.into_iter().flatten().collect();
        let inner = OperatorMatrix::from_row_slice(n, &flat).map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Parse the JSON interchange format `{"dim": n, "entries": [[re, im], ...]}`.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = hc::parse_matrix(text.as_bytes()).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[pyo3(signature = (label=None))]
    fn to_json(&self, label: Option<&str>) -> String {
        hc::serialize_matrix(&self.inner, label)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn rows(&self) -> Vec<Vec<Complex64>> {
        let n = self.inner.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.inner.get(i, j)).collect())
            .collect()
    }

    fn spectral_norm(&self) -> f64 {
        self.inner.spectral_norm()
    }

    fn spectrum(&self) -> PyResult<Vec<Complex64>> {
        hc::spectrum(&self.inner).map_err(to_py)
    }

    fn hermitian_part(&self) -> Self {
        Self {
            inner: hc::hermitian_part(&self.inner),
        }
    }

    fn __repr__(&self) -> String {
        format!("Matrix(dim={})", self.inner.dim())
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }
}

/// θ-method with step τ: x_{k+1} = D x_k, D = (I + τθB)⁻¹(I − τ(1−θ)B).
#[pyclass(name = "ThetaScheme", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PyThetaScheme {
    inner: hc::ThetaScheme,
}

#[pymethods]
impl PyThetaScheme {
    #[new]
    fn new(theta: f64, tau: f64) -> PyResult<Self> {
        let inner = hc::ThetaScheme::new(theta, tau).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn theta(&self) -> f64 {
        self.inner.theta()
    }

    #[getter]
    fn tau(&self) -> f64 {
        self.inner.tau()
    }

    fn __repr__(&self) -> String {
        format!(
            "ThetaScheme(theta={}, tau={})",
            self.inner.theta(),
            self.inner.tau()
        )
    }
}

#[pyclass(name = "IndexResult", frozen, get_all, skip_from_py_object)]
struct PyIndexResult {
    /// `None` when no partial sum up to `search_cap` is coercive.
    index: Option<usize>,
    witness_kappa: Option<f64>,
    search_cap: usize,
    partial_min_eigenvalues: Vec<f64>,
    marginal: bool,
}

impl From<hc::IndexResult> for PyIndexResult {
    fn from(r: hc::IndexResult) -> Self {
        Self {
            index: r.index,
            witness_kappa: r.witness_kappa,
            search_cap: r.search_cap,
            partial_min_eigenvalues: r.partial_min_eigenvalues,
            marginal: r.marginal,
        }
    }
}

#[pymethods]
impl PyIndexResult {
    fn __repr__(&self) -> String {
        format!(
            "IndexResult(index={:?}, witness_kappa={:?})",
            self.index, self.witness_kappa
        )
    }
}

#[pyclass(name = "Contractivity", frozen, get_all, skip_from_py_object)]
struct PyContractivity {
    /// "contractive", "semi_contractive" or "expanding".
    class_: &'static str,
    norm: f64,
    form_min_eigenvalue: f64,
    form_class: &'static str,
    marginal: bool,
}

#[pymethods]
impl PyContractivity {
    fn __repr__(&self) -> String {
        format!(
            "Contractivity(class_={:?}, norm={})",
            self.class_, self.norm
        )
    }
}

#[pyfunction]
#[pyo3(signature = (b, tol=None))]
fn is_semi_dissipative(b: &PyMatrix, tol: Option<f64>) -> PyResult<bool> {
    Ok(hc::is_semi_dissipative(&b.inner, tol)
        .map_err(to_py)?
        .semi_dissipative)
}

/// Spectral test: every eigenvalue of B has positive real part.
#[pyfunction]
#[pyo3(signature = (b, tol=None))]
fn is_hypocoercive(b: &PyMatrix, tol: Option<f64>) -> PyResult<bool> {
    Ok(hc::is_hypocoercive(&b.inner, tol)
        .map_err(to_py)?
        .hypocoercive)
}

#[pyfunction]
#[pyo3(signature = (b, tol=None, cap=None))]
fn hc_index(b: &PyMatrix, tol: Option<f64>, cap: Option<usize>) -> PyResult<PyIndexResult> {
    hc::hc_index(&b.inner, tol, cap)
        .map(Into::into)
        .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (b, scheme, tol=None, cap=None))]
fn dhc_index(
    b: &PyMatrix,
    scheme: &PyThetaScheme,
    tol: Option<f64>,
    cap: Option<usize>,
) -> PyResult<PyIndexResult> {
    hc::dhc_index(&b.inner, &scheme.inner, tol, cap)
        .map(Into::into)
        .map_err(to_py)
}

#[pyfunction]
fn theta_operator(b: &PyMatrix, scheme: &PyThetaScheme) -> PyResult<PyMatrix> {
    let inner = hc::theta_operator(&b.inner, &scheme.inner).map_err(to_py)?;
    Ok(PyMatrix { inner })
}

#[pyfunction]
#[pyo3(signature = (b, scheme, tol=None))]
fn classify_contractivity(
    b: &PyMatrix,
    scheme: &PyThetaScheme,
    tol: Option<f64>,
) -> PyResult<PyContractivity> {
    let c = hc::classify_contractivity(&b.inner, &scheme.inner, tol).map_err(to_py)?;
    Ok(PyContractivity {
        class_: c.class.as_str(),
        norm: c.norm,
        form_min_eigenvalue: c.form_min_eigenvalue,
        form_class: c.form_class.as_str(),
        marginal: c.marginal,
    })
}

/// Largest τ with ‖D(τ)‖ ≤ 1 for θ in [0, ½): a float, or `None` when no
/// step size works.
#[pyfunction]
#[pyo3(signature = (b, theta, tol=None))]
fn max_stepsize(b: &PyMatrix, theta: f64, tol: Option<f64>) -> PyResult<Option<f64>> {
    match hc::max_stepsize(&b.inner, theta, tol).map_err(to_py)? {
        hc::StepSizeWindow::AllTau => Ok(Some(f64::INFINITY)),
        hc::StepSizeWindow::UpTo { tau0, .. } => Ok(Some(tau0)),
        hc::StepSizeWindow::Empty => Ok(None),
    }
}

/// Fitted exponent a in 1 − ‖e^{−Bt}‖ ≈ c·tᵃ over t in [1e-4, 1e-2].
#[pyfunction]
fn short_time_exponent(b: &PyMatrix) -> PyResult<f64> {
    Ok(hc::short_time_exponent(&b.inner).map_err(to_py)?.a_hat)
}

/// ‖Dʲ‖ for j = 0..=k_max.
#[pyfunction]
fn discrete_norms(b: &PyMatrix, scheme: &PyThetaScheme, k_max: usize) -> PyResult<Vec<f64>> {
    Ok(hc::discrete_norm_sequence(&b.inner, &scheme.inner, k_max)
        .map_err(to_py)?
        .values)
}

/// Full analysis report as the CLI's JSON text.
#[pyfunction]
#[pyo3(signature = (b, thetas=vec![0.0, 0.5, 1.0], taus=vec![1.0], tol=None, cap=None, label=None))]
fn analyze(
    b: &PyMatrix,
    thetas: Vec<f64>,
    taus: Vec<f64>,
    tol: Option<f64>,
    cap: Option<usize>,
    label: Option<String>,
) -> PyResult<String> {
    let opts = hc::AnalyzeOptions {
        thetas,
        taus,
        tol,
        cap,
        label,
    };
    Ok(hc::run_analyze(&b.inner, &opts).map_err(to_py)?.to_json())
}

#[pymodule]
fn hypocontract_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("InputError", py.get_type::<InputError>())?;
    m.add(
        "SchemeInapplicableError",
        py.get_type::<SchemeInapplicableError>(),
    )?;
    m.add("NumericalError", py.get_type::<NumericalError>())?;
    m.add_class::<PyMatrix>()?;
    m.add_class::<PyThetaScheme>()?;
    m.add_class::<PyIndexResult>()?;
    m.add_class::<PyContractivity>()?;
    m.add_function(wrap_pyfunction!(is_semi_dissipative, m)?)?;
    m.add_function(wrap_pyfunction!(is_hypocoercive, m)?)?;
    m.add_function(wrap_pyfunction!(hc_index, m)?)?;
    m.add_function(wrap_pyfunction!(dhc_index, m)?)?;
    m.add_function(wrap_pyfunction!(theta_operator, m)?)?;
    m.add_function(wrap_pyfunction!(classify_contractivity, m)?)?;
    m.add_function(wrap_pyfunction!(max_stepsize, m)?)?;
    m.add_function(wrap_pyfunction!(short_time_exponent, m)?)?;
    m.add_function(wrap_pyfunction!(discrete_norms, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    Ok(())
}
