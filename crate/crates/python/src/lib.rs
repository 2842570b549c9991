//! Python bindings. Matrices cross the boundary as lists of rows of Python
//! `complex`; structured results come back as plain dicts.

use pyo3::exceptions::{PyMemoryError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use symsector::optimizer::{self, N4d2Form, OptimizerConfig, Refinement};
use symsector::projector as proj;
use symsector::states::{self, FMatrix};
use symsector::witness_ppt::{self as wp, SubsetMask};
use symsector::{CMatrix, Complex64, Composition, Error};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Budget { .. } | Error::Size(_) => PyMemoryError::new_err(e.to_string()),
        Error::Consistency(_) | Error::LemmaViolation { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

trait OrPy<T> {
    fn or_py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for symsector::Result<T> {
    fn or_py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

/// Round-trips through JSON so results arrive as dicts, lists and floats.
fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn rows(m: &CMatrix) -> Vec<Vec<Complex64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn matrix(rows: Vec<Vec<Complex64>>) -> PyResult<CMatrix> {
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(PyValueError::new_err("matrix rows differ in length"));
    }
    Ok(CMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

fn fmatrix(f: Vec<Vec<Complex64>>) -> PyResult<FMatrix> {
    FMatrix::new(matrix(f)?).or_py()
}

/// Validated density matrix on `(C^d)^{⊗n}`.
#[pyclass(name = "DensityMatrix", module = "symsector_py", frozen)]
struct PyDensityMatrix {
    inner: states::DensityMatrix,
}

#[pymethods]
impl PyDensityMatrix {
    #[new]
    fn new(rows: Vec<Vec<Complex64>>, d: usize, n: usize) -> PyResult<Self> {
        Ok(Self {
            inner: states::DensityMatrix::new(matrix(rows)?, d, n).or_py()?,
        })
    }

    /// Generalized Werner state.
    #[staticmethod]
    #[pyo3(signature = (p, d = 2, n = 3))]
    fn werner(p: f64, d: usize, n: usize) -> PyResult<Self> {
        Ok(Self {
            inner: wp::werner_state(p, d, n).or_py()?,
        })
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.d()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn matrix(&self) -> Vec<Vec<Complex64>> {
        rows(self.inner.matrix())
    }

    /// `Tr(Πρ)`.
    fn symmetric_trace(&self) -> PyResult<f64> {
        proj::symmetric_trace(&self.inner).or_py()
    }

    /// Partial transpose on the 1-based particle labels in `subset`.
    fn partial_transpose(&self, subset: Vec<usize>) -> PyResult<Vec<Vec<Complex64>>> {
        let s = SubsetMask::from_members(&subset).or_py()?;
        Ok(rows(&wp::partial_transpose(&self.inner, s).or_py()?))
    }

    #[pyo3(signature = (tol = wp::PSD_TOL))]
    fn ppt_sweep<'py>(&self, py: Python<'py>, tol: f64) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &wp::ppt_sweep_with_tol(&self.inner, tol).or_py()?)
    }

    /// `Tr((Π − B·1)ρ)`; `bound` defaults to the known bound.
    #[pyo3(signature = (bound = None))]
    fn witness_value(&self, bound: Option<f64>) -> PyResult<f64> {
        let w = wp::witness(self.inner.d(), self.inner.n(), bound).or_py()?;
        wp::witness_value(&w, &self.inner).or_py()
    }

    fn __repr__(&self) -> String {
        format!("DensityMatrix(d={}, n={})", self.inner.d(), self.inner.n())
    }
}

/// Projector onto the symmetric sector.
#[pyclass(name = "Projector", module = "symsector_py", frozen)]
struct PyProjector {
    inner: symsector::Projector,
}

#[pymethods]
impl PyProjector {
    /// `construction` is `"dicke"` or `"permutation"`.
    #[new]
    #[pyo3(signature = (d, n, construction = "dicke"))]
    fn new(d: usize, n: usize, construction: &str) -> PyResult<Self> {
        let inner = match construction {
            "dicke" => proj::projector_dicke(d, n),
            "permutation" => proj::projector_permutation(d, n),
            other => return Err(PyValueError::new_err(format!("unknown construction {other:?}"))),
        }
        .or_py()?;
        Ok(Self { inner })
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.d()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn rank(&self) -> usize {
        self.inner.rank()
    }

    fn matrix(&self) -> Vec<Vec<Complex64>> {
        rows(self.inner.matrix())
    }

    fn defects<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.defects())
    }

    fn __repr__(&self) -> String {
        format!(
            "Projector(d={}, n={}, rank={})",
            self.inner.d(),
            self.inner.n(),
            self.inner.rank()
        )
    }
}

/// Dicke state amplitudes for a composition such as `[1, 0, 2]`.
#[pyfunction]
fn dicke_state(k: Vec<usize>) -> PyResult<Vec<Complex64>> {
    let psi = states::dicke_state(&Composition::new(k).or_py()?).or_py()?;
    Ok(psi.amplitudes().iter().copied().collect())
}

/// `‖ψ‖²_SS` of the product state with F-matrix `f` (`n` rows of `d`).
/// `method`: `"orbit"`, `"cycles"` or `"explicit"`.
#[pyfunction]
#[pyo3(signature = (f, method = "orbit"))]
fn symmetric_norm_squared(f: Vec<Vec<Complex64>>, method: &str) -> PyResult<f64> {
    let f = fmatrix(f)?;
    match method {
        "orbit" => proj::symmetric_norm_squared(&f),
        "cycles" => proj::symmetric_norm_squared_cycles(&f),
        "explicit" => proj::projector_dicke(f.d(), f.n()).and_then(|pi| proj::symmetric_norm_squared_explicit(&f, &pi)),
        other => return Err(PyValueError::new_err(format!("unknown method {other:?}"))),
    }
    .or_py()
}

#[pyfunction]
#[pyo3(signature = (f, tol = None))]
fn property_a_check<'py>(py: Python<'py>, f: Vec<Vec<Complex64>>, tol: Option<f64>) -> PyResult<Bound<'py, PyAny>> {
    let f = fmatrix(f)?;
    let tol = tol.unwrap_or_else(|| symsector::lemma_oracle::default_tolerance(&f));
    to_py(py, &symsector::lemma_oracle::property_a_check(&f, tol).or_py()?)
}

#[pyfunction]
#[pyo3(signature = (n, d, trials = 1000, seed = 0, row_floor = 0.1))]
fn lemma_fuzz<'py>(
    py: Python<'py>,
    n: usize,
    d: usize,
    trials: usize,
    seed: u64,
    row_floor: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let report = py
        .detach(|| symsector::lemma_oracle::lemma_fuzz(n, d, trials, seed, row_floor))
        .or_py()?;
    to_py(py, &report)
}

#[pyfunction]
fn known_bound(n: usize, d: usize) -> Option<f64> {
    optimizer::known_bound(n, d)
}

/// Grid search plus Nelder–Mead. `specialized=True` (four qubits only) uses
/// the reduced closed form; `typeset_form=True` selects the variant as
/// printed in the literature.
#[pyfunction]
#[pyo3(signature = (n, d, grid_points = 41, restarts = 8, tolerance = 1e-10, refine = true, specialized = false, typeset_form = false))]
#[allow(clippy::too_many_arguments)]
fn minimize<'py>(
    py: Python<'py>,
    n: usize,
    d: usize,
    grid_points: usize,
    restarts: usize,
    tolerance: f64,
    refine: bool,
    specialized: bool,
    typeset_form: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let config = OptimizerConfig {
        grid_points,
        restarts,
        tolerance,
        refinement: if refine {
            Refinement::NelderMead
        } else {
            Refinement::None
        },
        ..OptimizerConfig::default()
    };
    let result = py
        .detach(|| {
            if specialized {
                if (n, d) != (4, 2) {
                    return Err(Error::Invalid("specialized search needs n = 4, d = 2".into()));
                }
                let form = if typeset_form {
                    N4d2Form::AsPrinted
                } else {
                    N4d2Form::Corrected
                };
                optimizer::minimize_n4d2(form, &config)
            } else {
                optimizer::minimize(n, d, &config)
            }
        })
        .or_py()?;
    to_py(py, &result)
}

#[pyfunction]
fn objective_n4d2(x: f64, y: f64, z: f64, w: f64) -> PyResult<f64> {
    optimizer::objective_n4d2(x, y, z, w).or_py()
}

#[pyfunction]
fn typeset_objective(x: f64, y: f64, z: f64, w: f64) -> PyResult<f64> {
    optimizer::typeset_objective(x, y, z, w).or_py()
}

#[pyfunction]
fn constrained_subcase_check<'py>(py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &optimizer::constrained_subcase_check())
}

/// `Π − B·1` as a matrix.
#[pyfunction]
#[pyo3(signature = (d, n, bound = None))]
fn witness(d: usize, n: usize, bound: Option<f64>) -> PyResult<Vec<Vec<Complex64>>> {
    Ok(rows(&wp::witness(d, n, bound).or_py()?.matrix))
}

#[pyfunction]
#[pyo3(signature = (h, tol = wp::PSD_TOL))]
fn is_psd<'py>(py: Python<'py>, h: Vec<Vec<Complex64>>, tol: f64) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &wp::is_psd(&matrix(h)?, tol).or_py()?)
}

#[pyfunction]
fn werner_thresholds<'py>(py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &wp::werner_thresholds().or_py()?)
}

#[pyfunction]
#[pyo3(signature = (p_min = 0.0, p_max = 1.0, steps = 101, d = 2, n = 3))]
fn werner_scan<'py>(
    py: Python<'py>,
    p_min: f64,
    p_max: f64,
    steps: usize,
    d: usize,
    n: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let scan = py.detach(|| wp::werner_scan(p_min, p_max, steps, d, n)).or_py()?;
    to_py(py, &scan)
}

#[pymodule]
pub fn symsector_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDensityMatrix>()?;
    m.add_class::<PyProjector>()?;
    m.add_function(wrap_pyfunction!(dicke_state, m)?)?;
    m.add_function(wrap_pyfunction!(symmetric_norm_squared, m)?)?;
    m.add_function(wrap_pyfunction!(property_a_check, m)?)?;
    m.add_function(wrap_pyfunction!(lemma_fuzz, m)?)?;
    m.add_function(wrap_pyfunction!(known_bound, m)?)?;
    m.add_function(wrap_pyfunction!(minimize, m)?)?;
    m.add_function(wrap_pyfunction!(objective_n4d2, m)?)?;
    m.add_function(wrap_pyfunction!(typeset_objective, m)?)?;
    m.add_function(wrap_pyfunction!(constrained_subcase_check, m)?)?;
    m.add_function(wrap_pyfunction!(witness, m)?)?;
    m.add_function(wrap_pyfunction!(is_psd, m)?)?;
    m.add_function(wrap_pyfunction!(werner_thresholds, m)?)?;
    m.add_function(wrap_pyfunction!(werner_scan, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
