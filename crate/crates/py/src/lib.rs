use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

use renorm_core::analytic::{Fn1, Interval};
use renorm_core::cantor::{average_jacobian, pieces_at_depth, tip, RenormTower};
use renorm_core::cli::{self, MapSpecDocument, Options};
use renorm_core::fixedpoint::{operator_spectrum, solve_fixed_point, FixedPointResult};
use renorm_core::unimodal::{UnimodalMap, UnimodalPermutation};
use renorm_core::{Config, Error};

create_exception!(renorm, RenormError, PyException);

fn err(e: Error) -> PyErr {
    match e {
        Error::BadInput(_) | Error::InvalidPermutation(_) => PyValueError::new_err(e.to_string()),
        e => RenormError::new_err(format!("{}: {e}", e.kind())),
    }
}

#[pyclass(name = "Permutation", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPermutation(UnimodalPermutation);

#[pymethods]
impl PyPermutation {
    /// Parses "p=3; 0->1,1->2,2->0".
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        UnimodalPermutation::parse(text).map(PyPermutation).map_err(err)
    }

    #[staticmethod]
    fn doubling() -> Self {
        PyPermutation(UnimodalPermutation::doubling())
    }

    #[getter]
    fn p(&self) -> usize {
        self.0.p()
    }

    #[getter]
    fn images(&self) -> Vec<usize> {
        self.0.perm().to_vec()
    }

    fn __repr__(&self) -> String {
        let body: Vec<String> = self.0.perm().iter().enumerate().map(|(i, j)| format!("{i}->{j}")).collect();
        format!("Permutation('p={}; {}')", self.0.p(), body.join(","))
    }
}

#[pyclass(name = "UnimodalMap", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyUnimodalMap(UnimodalMap);

#[pymethods]
impl PyUnimodalMap {
    #[staticmethod]
    fn logistic(a: f64) -> PyResult<Self> {
        UnimodalMap::logistic(a).map(PyUnimodalMap).map_err(err)
    }

    /// f(x) = Σ coeffs[i] xⁱ on [0, 1].
    #[staticmethod]
    fn polynomial(coeffs: Vec<f64>) -> PyResult<Self> {
        let f = Fn1::from_fn(Interval::UNIT, (coeffs.len() + 1).max(3), |x| coeffs.iter().rev().fold(0.0, |a, &c| a * x + c));
        UnimodalMap::new(f, &Config::default()).map(PyUnimodalMap).map_err(err)
    }

    fn __call__(&self, x: f64) -> f64 {
        self.0.eval(x)
    }

    fn derivative(&self, x: f64) -> f64 {
        self.0.deriv(x)
    }

    #[getter]
    fn critical_point(&self) -> f64 {
        self.0.c0()
    }

    #[getter]
    fn critical_value(&self) -> f64 {
        self.0.critical_value()
    }

    fn distance(&self, other: &PyUnimodalMap) -> f64 {
        self.0.distance(&other.0)
    }
}

#[pyclass(name = "FixedPoint", frozen)]
struct PyFixedPoint {
    fp: FixedPointResult,
    v: UnimodalPermutation,
}

#[pymethods]
impl PyFixedPoint {
    #[getter]
    fn sigma(&self) -> f64 {
        self.fp.sigma
    }

    #[getter]
    fn residual(&self) -> f64 {
        self.fp.residual
    }

    #[getter]
    fn newton_iterations(&self) -> usize {
        self.fp.newton_iterations
    }

    #[getter]
    fn f_star(&self) -> PyUnimodalMap {
        PyUnimodalMap(self.fp.f_star.clone())
    }

    /// Chebyshev coefficients of f_* on [0, 1].
    #[getter]
    fn coefficients(&self) -> Vec<f64> {
        self.fp.f_star.f().coeffs().to_vec()
    }

    fn unstable_eigenvalue(&self, py: Python<'_>) -> PyResult<f64> {
        let cfg = Config::default();
        py.detach(|| operator_spectrum(&self.fp, &self.v, &cfg)).map(|s| s.unstable_eigenvalue).map_err(err)
    }
}

#[pyfunction]
#[pyo3(signature = (perm, seed, tol = 1e-9))]
fn fixed_point(py: Python<'_>, perm: &PyPermutation, seed: &PyUnimodalMap, tol: f64) -> PyResult<PyFixedPoint> {
    let cfg = Config::default();
    let v = perm.0.clone();
    let fp = py.detach(|| solve_fixed_point(&v, &seed.0, tol, &cfg)).map_err(err)?;
    Ok(PyFixedPoint { fp, v })
}

#[pyclass(name = "MapSpec", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyMapSpec(MapSpecDocument);

#[pymethods]
impl PyMapSpec {
    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        MapSpecDocument::from_toml(text).map(PyMapSpec).map_err(err)
    }

    fn to_toml(&self) -> String {
        self.0.to_toml()
    }

    /// The renormalisation tower of the map, `depth` levels deep.
    #[pyo3(signature = (depth, perm = None))]
    fn tower(&self, py: Python<'_>, depth: usize, perm: Option<&str>) -> PyResult<PyTower> {
        let cfg = Config::default();
        let t = py
            .detach(|| self.0.prepare(perm, &cfg).and_then(|m| m.tower(depth, &cfg)))
            .map_err(err)?;
        Ok(PyTower(t))
    }
}

#[pyclass(name = "Tower", frozen)]
struct PyTower(RenormTower);

#[pymethods]
impl PyTower {
    #[getter]
    fn depth(&self) -> usize {
        self.0.depth()
    }

    #[getter]
    fn eps_sup(&self) -> Vec<f64> {
        self.0.eps_sup()
    }

    fn average_jacobian(&self, py: Python<'_>, n: usize) -> PyResult<f64> {
        let cfg = Config::default();
        py.detach(|| average_jacobian(&self.0, n, &cfg)).map(|b| b.b).map_err(err)
    }

    /// (word, center x, center y, diameter) for every depth-n piece.
    fn pieces(&self, py: Python<'_>, n: usize) -> PyResult<Vec<(String, f64, f64, f64)>> {
        let cfg = Config::default();
        let c = py.detach(|| pieces_at_depth(&self.0, n, &cfg)).map_err(err)?;
        Ok(c.pieces.iter().map(|p| (p.word.to_string(), p.center.x, p.center.y, p.diam())).collect())
    }

    fn tip(&self) -> PyResult<(f64, f64)> {
        let t = tip(&self.0).map_err(err)?;
        Ok((t.tau.x, t.tau.y))
    }
}

/// Runs a `renorm` command on TOML map documents and returns the result
/// document as JSON text.
#[pyfunction]
#[pyo3(signature = (command, specs, perm = None, depth = None, tol = None))]
fn run(py: Python<'_>, command: &str, specs: Vec<String>, perm: Option<String>, depth: Option<usize>, tol: Option<f64>) -> PyResult<String> {
    let cmd = match command {
        "fixed-point" => cli::Command::FixedPoint,
        "tower" => cli::Command::Tower,
        "cantor" => cli::Command::Cantor,
        "jacobian" => cli::Command::Jacobian,
        "universality" => cli::Command::Universality,
        "linefield" => cli::Command::Linefield,
        "rigidity" => cli::Command::Rigidity,
        other => return Err(PyValueError::new_err(format!("unknown command {other:?}"))),
    };
    let docs = specs.iter().map(|s| MapSpecDocument::from_toml(s)).collect::<Result<Vec<_>, _>>().map_err(err)?;
    let opts = Options { perm, depth, tol };
    let cfg = Config::default();
    let doc = py.detach(|| cli::run(cmd, &docs, &opts, &cfg)).map_err(err)?;
    Ok(doc.to_json())
}

#[pymodule]
fn renorm(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("RenormError", m.py().get_type::<RenormError>())?;
    m.add_class::<PyPermutation>()?;
    m.add_class::<PyUnimodalMap>()?;
    m.add_class::<PyFixedPoint>()?;
    m.add_class::<PyMapSpec>()?;
    m.add_class::<PyTower>()?;
    m.add_function(wrap_pyfunction!(fixed_point, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
