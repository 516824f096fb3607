//! Python bindings for `mbl-core`.
//!
//! Library errors surface as `ValueError` carrying the error kind and
//! message; structured results (reports, constants) are returned as
//! Python-friendly values or JSON text.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use mbl::asymptotics;
use mbl::exact;
use mbl::fields::{sample_geom_field, Extent, Grid, RandomSeed, DEFAULT_TV_TOL};
use mbl::fredholm::fdet_discrete;
use mbl::harness::{self, ExperimentConfig, ExperimentId, Sampler};
use mbl::kernels::{self, KdKernel, KernelFn};
use mbl::lpp::{lpp_max_sum, Orientation};
use mbl::tableaux::{burge_column_insert, rsk_row_insert};

fn py_err(e: mbl::Error) -> PyErr {
    PyValueError::new_err(format!("{}: {e}", e.kind()))
}

fn extent(v: Option<usize>) -> Extent {
    v.map_or(Extent::Infinite, Extent::Finite)
}

/// Model parameters; `rows`/`cols` of `None` mean an infinite extent.
#[pyclass(name = "ModelParams", module = "mbl_py", frozen, from_py_object)]
#[derive(Clone)]
struct PyModelParams(mbl::ModelParams);

#[pymethods]
impl PyModelParams {
    /// Geometric model with weights Geom(a q^{(i-1/2)/η} q^{(j-1/2)/θ}).
    #[staticmethod]
    #[pyo3(signature = (a, q, eta, theta, rows=None, cols=None))]
    fn geometric(a: f64, q: f64, eta: f64, theta: f64, rows: Option<usize>, cols: Option<usize>) -> PyResult<Self> {
        mbl::ModelParams::geometric(a, q, eta, theta)
            .and_then(|p| p.with_extent(extent(rows), extent(cols)))
            .map(Self)
            .map_err(py_err)
    }

    /// Power model on a finite `rows x cols` rectangle.
    #[staticmethod]
    fn power(alpha: f64, eta: f64, theta: f64, rows: usize, cols: usize) -> PyResult<Self> {
        mbl::ModelParams::power(alpha, eta, theta, rows, cols).map(Self).map_err(py_err)
    }

    #[getter]
    fn a(&self) -> f64 {
        self.0.a
    }

    #[getter]
    fn q(&self) -> f64 {
        self.0.q
    }

    #[getter]
    fn eta(&self) -> f64 {
        self.0.eta
    }

    #[getter]
    fn theta(&self) -> f64 {
        self.0.theta
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.0.alpha
    }

    #[getter]
    fn rows(&self) -> Option<usize> {
        self.0.m.finite()
    }

    #[getter]
    fn cols(&self) -> Option<usize> {
        self.0.n.finite()
    }

    fn __repr__(&self) -> String {
        format!("ModelParams({})", serde_json::to_string(&self.0).expect("serializes"))
    }
}

#[pyclass(name = "TWConstants", module = "mbl_py", frozen, get_all)]
struct PyTWConstants {
    b: f64,
    z_c: f64,
    v_c: f64,
    c1: f64,
    c2: f64,
}

#[pymethods]
impl PyTWConstants {
    fn __repr__(&self) -> String {
        format!("TWConstants(b={}, z_c={}, v_c={}, c1={}, c2={})", self.b, self.z_c, self.v_c, self.c1, self.c2)
    }
}

fn grid(rows: Vec<Vec<u64>>) -> PyResult<Grid<u64>> {
    Grid::from_rows(&rows).map_err(py_err)
}

/// `n` samples of a last-passage statistic (L1geo, L2geo, corner-RSK,
/// corner-Burge, L1pow, L2pow).
#[pyfunction]
fn sample_lpp(params: &PyModelParams, sampler: &str, n: usize, seed: u64) -> PyResult<Vec<f64>> {
    let s: Sampler = sampler.parse().map_err(py_err)?;
    let mut v = harness::sample_statistics(&[s], &params.0, n, seed).map_err(py_err)?;
    Ok(v.pop().expect("one sampler"))
}

/// Plane partition obtained from one sampled geometric field by RSK
/// (`"rsk"`) or Burge (`"burge"`) insertion.
#[pyfunction]
#[pyo3(signature = (params, seed, insertion="rsk"))]
fn sample_pp(params: &PyModelParams, seed: u64, insertion: &str) -> PyResult<Vec<Vec<u64>>> {
    let f = sample_geom_field(&params.0, RandomSeed::new(seed, 0), DEFAULT_TV_TOL).map_err(py_err)?;
    let pp = match insertion {
        "rsk" => rsk_row_insert(&f.entries),
        "burge" => burge_column_insert(&f.entries),
        _ => return Err(PyValueError::new_err(format!("unknown insertion {insertion:?}"))),
    };
    Ok(pp.to_rows())
}

/// Down-left (`"down-left"`) or down-right (`"down-right"`) max-sum
/// last-passage value of an integer matrix.
#[pyfunction]
#[pyo3(signature = (matrix, orientation="down-left"))]
fn lpp(matrix: Vec<Vec<u64>>, orientation: &str) -> PyResult<u64> {
    let o = match orientation {
        "down-left" => Orientation::DownLeft,
        "down-right" => Orientation::DownRight,
        _ => return Err(PyValueError::new_err(format!("unknown orientation {orientation:?}"))),
    };
    lpp_max_sum(&grid(matrix)?, o).map_err(py_err)
}

#[pyfunction]
fn rsk(matrix: Vec<Vec<u64>>) -> PyResult<Vec<Vec<u64>>> {
    Ok(rsk_row_insert(&grid(matrix)?).to_rows())
}

#[pyfunction]
fn burge(matrix: Vec<Vec<u64>>) -> PyResult<Vec<Vec<u64>>> {
    Ok(burge_column_insert(&grid(matrix)?).to_rows())
}

/// Partition function Z of the plane-partition measure.
#[pyfunction]
fn partition_fn(params: &PyModelParams) -> PyResult<f64> {
    exact::partition_fn(&params.0).map_err(py_err)
}

/// Discrete correlation kernel K_d(k, l) at half-integers.
#[pyfunction]
fn kd_eval(params: &PyModelParams, k: f64, l: f64) -> PyResult<f64> {
    KdKernel::new(&params.0).and_then(|kern| kern.eval(k, l)).map_err(py_err)
}

/// Hard-edge kernel by its double series.
#[pyfunction]
fn khe(x: f64, y: f64, alpha: f64, eta: f64, theta: f64) -> PyResult<f64> {
    kernels::khe_series(x, y, alpha, eta, theta, kernels::KHE_TOL).map_err(py_err)
}

#[pyfunction]
fn bessel_kernel(x: f64, y: f64, alpha: f64) -> PyResult<f64> {
    kernels::bessel_kernel(x, y, alpha).map_err(py_err)
}

#[pyfunction]
fn airy_kernel(x: f64, y: f64) -> PyResult<f64> {
    kernels::airy_kernel(x, y).map_err(py_err)
}

/// Finite-size kernel of the power model on an `m x n` rectangle.
#[pyfunction]
fn kc_eval(x: f64, y: f64, alpha: f64, eta: f64, theta: f64, m: usize, n: usize) -> PyResult<f64> {
    kernels::kc_eval(x, y, alpha, eta, theta, m, n).map_err(py_err)
}

/// P(L ≤ l) for the geometric model: det(1 − K_d) on {l+1/2, l+3/2, ...}.
#[pyfunction]
fn lpp_cdf(params: &PyModelParams, l: i64) -> PyResult<f64> {
    let k = KdKernel::new(&params.0).map_err(py_err)?;
    let table = harness::discrete_cdf_table(&k, l, l, harness::DISCRETE_TAIL_TOL).map_err(py_err)?;
    Ok(table[0])
}

/// det(1 − K_d) truncated to `t` lattice points above `l`.
#[pyfunction]
fn fredholm_discrete(params: &PyModelParams, l: i64, t: usize, tol: f64) -> PyResult<(f64, f64)> {
    let k = KdKernel::new(&params.0).map_err(py_err)?;
    let r = fdet_discrete(&k, l, t, tol).map_err(py_err)?;
    Ok((r.value, r.est_error))
}

#[pyfunction]
fn f_alpha(s: f64, alpha: f64, eta: f64, theta: f64) -> PyResult<f64> {
    asymptotics::f_alpha(s, alpha, eta, theta).map_err(py_err)
}

#[pyfunction]
fn f_tw(s: f64) -> PyResult<f64> {
    asymptotics::f_tw(s).map_err(py_err)
}

#[pyfunction]
fn tw_constants(a: f64, eta: f64, theta: f64) -> PyResult<PyTWConstants> {
    let c = asymptotics::tw_constants(a, eta, theta).map_err(py_err)?;
    Ok(PyTWConstants { b: c.b, z_c: c.z_c, v_c: c.v_c, c1: c.c1, c2: c.c2 })
}

/// Run a named experiment; `config` is a JSON object of overrides.
/// Returns the report as JSON text.
#[pyfunction]
#[pyo3(signature = (id, config=None))]
fn experiment(py: Python<'_>, id: &str, config: Option<&str>) -> PyResult<String> {
    let id: ExperimentId = id.parse().map_err(py_err)?;
    let cfg: ExperimentConfig = match config {
        Some(text) => serde_json::from_str(text).map_err(|e| PyValueError::new_err(format!("config: {e}")))?,
        None => ExperimentConfig::default(),
    };
    let report = py.detach(|| harness::experiment(id, &cfg)).map_err(py_err)?;
    Ok(report.to_json())
}

#[pymodule]
fn mbl_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModelParams>()?;
    m.add_class::<PyTWConstants>()?;
    m.add_function(wrap_pyfunction!(sample_lpp, m)?)?;
    m.add_function(wrap_pyfunction!(sample_pp, m)?)?;
    m.add_function(wrap_pyfunction!(lpp, m)?)?;
    m.add_function(wrap_pyfunction!(rsk, m)?)?;
    m.add_function(wrap_pyfunction!(burge, m)?)?;
    m.add_function(wrap_pyfunction!(partition_fn, m)?)?;
    m.add_function(wrap_pyfunction!(kd_eval, m)?)?;
    m.add_function(wrap_pyfunction!(khe, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(airy_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(kc_eval, m)?)?;
    m.add_function(wrap_pyfunction!(lpp_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(fredholm_discrete, m)?)?;
    m.add_function(wrap_pyfunction!(f_alpha, m)?)?;
    m.add_function(wrap_pyfunction!(f_tw, m)?)?;
    m.add_function(wrap_pyfunction!(tw_constants, m)?)?;
    m.add_function(wrap_pyfunction!(experiment, m)?)?;
    Ok(())
}
