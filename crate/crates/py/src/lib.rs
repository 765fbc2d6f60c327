//! Python module `bandsamp`: density constants, frame bounds and the
//! sandwich verification harness.

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use bandsamp::bunched::{self as bunched_core, BunchedKind};
use bandsamp::constants::{self as consts, Branch};
use bandsamp::geometry::{self as geom, BunchedSet, OffsetMode};
use bandsamp::harness::{self, Ensemble};
use bandsamp::{io, tables, wirtinger as wirt, Error};

create_exception!(bandsamp, PreconditionError, PyValueError, "A density or perturbation precondition is violated.");

fn err(e: Error) -> PyErr {
    match e {
        Error::Precondition(_) => PreconditionError::new_err(e.to_string()),
        Error::InvalidInput(_) | Error::Unsupported(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn branch_name(b: Branch) -> &'static str {
    match b {
        Branch::H => "H",
        Branch::G => "G",
    }
}

/// Lower and upper frame bounds with the admissibility of the density condition.
#[pyclass(frozen, get_all, skip_from_py_object, module = "bandsamp")]
#[derive(Clone, Copy)]
pub struct FrameBounds {
    pub lower: f64,
    pub upper: f64,
    pub admissible: bool,
}

#[pymethods]
impl FrameBounds {
    fn __repr__(&self) -> String {
        format!("FrameBounds(lower={}, upper={}, admissible={})", self.lower, self.upper, self.admissible)
    }
}

impl From<consts::FrameBounds> for FrameBounds {
    fn from(b: consts::FrameBounds) -> Self {
        Self { lower: b.lower, upper: b.upper, admissible: b.admissible }
    }
}

/// `C(k,d)` and the branch (`"H"` or `"G"`) attaining it.
#[pyclass(frozen, get_all, skip_from_py_object, module = "bandsamp")]
#[derive(Clone)]
pub struct DensityConstant {
    pub k: u32,
    pub d: u32,
    pub value: f64,
    pub branch: &'static str,
}

#[pymethods]
impl DensityConstant {
    fn __repr__(&self) -> String {
        format!("DensityConstant(k={}, d={}, value={}, branch='{}')", self.k, self.d, self.value, self.branch)
    }
}

/// First root `τ_1` of the boundary determinant and `c_k = 1/τ_1`.
#[pyclass(frozen, get_all, skip_from_py_object, module = "bandsamp")]
#[derive(Clone)]
pub struct WirtingerResult {
    pub k: u32,
    pub tau_1: f64,
    pub c_k: f64,
    pub residual: f64,
}

#[pymethods]
impl WirtingerResult {
    fn __repr__(&self) -> String {
        format!("WirtingerResult(k={}, tau_1={}, c_k={})", self.k, self.tau_1, self.c_k)
    }
}

/// A strictly increasing sampling set in a finite window.
#[pyclass(frozen, skip_from_py_object, module = "bandsamp")]
#[derive(Clone)]
pub struct SamplingSet1D {
    inner: geom::SamplingSet1D,
}

#[pymethods]
impl SamplingSet1D {
    #[new]
    fn new(points: Vec<f64>, window: (f64, f64)) -> PyResult<Self> {
        Ok(Self { inner: geom::SamplingSet1D::new(points, window).map_err(err)? })
    }

    /// Points `n·spacing + U(−jitter, jitter)`, `|n| ≤ half_count`.
    #[staticmethod]
    #[pyo3(signature = (spacing, jitter, half_count, seed=0))]
    fn jittered(spacing: f64, jitter: f64, half_count: usize, seed: u64) -> PyResult<Self> {
        Ok(Self { inner: geom::jittered_set(spacing, jitter, half_count, seed).map_err(err)? })
    }

    #[staticmethod]
    fn uniform(spacing: f64, half_count: usize) -> PyResult<Self> {
        Ok(Self { inner: geom::SamplingSet1D::uniform(spacing, half_count).map_err(err)? })
    }

    /// Parses a `[set1d]` record.
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(Self { inner: io::read_set_1d(text).map_err(err)? })
    }

    fn to_text(&self) -> String {
        io::write_set_1d(&self.inner)
    }

    #[getter]
    fn points(&self) -> Vec<f64> {
        self.inner.points().to_vec()
    }

    #[getter]
    fn window(&self) -> (f64, f64) {
        self.inner.window()
    }

    /// Covering radius `δ`.
    fn density(&self) -> PyResult<f64> {
        geom::density_1d(&self.inner).map_err(err)
    }

    /// Voronoi cell `V_n` clipped to the window.
    fn cell(&self, n: usize) -> PyResult<(f64, f64)> {
        if n >= self.inner.len() {
            return Err(PyValueError::new_err(format!("index {n} out of range")));
        }
        Ok(self.inner.cell(n))
    }

    /// Rows `[μ_{n,0}, …, μ_{n,k}]` of the Voronoi moment weights.
    fn weights(&self, k: u32) -> Vec<Vec<f64>> {
        geom::weights_1d(&self.inner, k).mu
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        let (lo, hi) = self.inner.window();
        format!("SamplingSet1D(n={}, window=({lo}, {hi}))", self.inner.len())
    }
}

/// Outcome of a sandwich run over a random test-function ensemble.
#[pyclass(frozen, module = "bandsamp")]
pub struct FrameReport {
    inner: harness::FrameReport,
}

#[pymethods]
impl FrameReport {
    #[getter]
    fn experiment(&self) -> String {
        self.inner.config.experiment.clone()
    }

    #[getter]
    fn ratios(&self) -> Vec<f64> {
        self.inner.ratios.clone()
    }

    #[getter]
    fn tail_tols(&self) -> Vec<f64> {
        self.inner.tail_tols.clone()
    }

    #[getter]
    fn a_theory(&self) -> f64 {
        self.inner.a_theory
    }

    #[getter]
    fn b_theory(&self) -> f64 {
        self.inner.b_theory
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.inner.config.delta
    }

    #[getter]
    fn admissible(&self) -> bool {
        self.inner.admissible
    }

    #[getter]
    fn n_violations(&self) -> usize {
        self.inner.violations.len()
    }

    fn passed(&self) -> bool {
        self.inner.passed()
    }

    fn min_ratio(&self) -> f64 {
        self.inner.min_ratio()
    }

    fn max_ratio(&self) -> f64 {
        self.inner.max_ratio()
    }

    /// The full report, including the echoed configuration, as JSON.
    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        format!(
            "FrameReport(experiment='{}', ratios=[{:.6}, {:.6}], bounds=[{:.6}, {:.6}], passed={})",
            self.inner.config.experiment,
            self.inner.min_ratio(),
            self.inner.max_ratio(),
            self.inner.a_theory,
            self.inner.b_theory,
            self.inner.passed()
        )
    }
}

fn report(r: bandsamp::Result<harness::FrameReport>) -> PyResult<FrameReport> {
    Ok(FrameReport { inner: r.map_err(err)? })
}

#[pyfunction]
fn eval_r_k(k: u32, z: f64) -> PyResult<f64> {
    consts::eval_r_k(k, z).map_err(err)
}

#[pyfunction]
fn eval_h_k(k: u32, z: f64) -> PyResult<f64> {
    consts::eval_h_k(k, z).map_err(err)
}

#[pyfunction]
fn eval_g_kd(k: u32, d: u32, z: f64) -> PyResult<f64> {
    consts::eval_g_kd(k, d, z).map_err(err)
}

#[pyfunction]
fn constant_c(k: u32, d: u32) -> PyResult<DensityConstant> {
    let c = consts::constant_c(k, d).map_err(err)?;
    Ok(DensityConstant { k: c.k, d: c.d, value: c.value, branch: branch_name(c.branch) })
}

#[pyfunction]
fn frame_bounds_1d(k: u32, delta: f64, m_omega: f64) -> PyResult<FrameBounds> {
    Ok(consts::frame_bounds_1d(k, delta, m_omega).map_err(err)?.into())
}

#[pyfunction]
#[pyo3(signature = (k, d, delta, m_omega, b=1.0))]
fn frame_bounds_dd(k: u32, d: u32, delta: f64, m_omega: f64, b: f64) -> PyResult<FrameBounds> {
    let inputs = consts::BoundInputs::new(delta, m_omega, b).map_err(err)?;
    Ok(consts::frame_bounds_dd(k, d, inputs).map_err(err)?.into())
}

#[pyfunction]
#[pyo3(signature = (a, b_upper, m_omega, b=1.0))]
fn perturb_bound(a: f64, b_upper: f64, m_omega: f64, b: f64) -> PyResult<f64> {
    consts::perturb_bound(a, b_upper, m_omega, b).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (a, b_upper, m_omega, eps, b=1.0))]
fn perturbed_bounds(a: f64, b_upper: f64, m_omega: f64, eps: f64, b: f64) -> PyResult<FrameBounds> {
    Ok(consts::perturbed_bounds(a, b_upper, m_omega, b, eps).map_err(err)?.into())
}

#[pyfunction]
fn wirtinger(k: u32) -> PyResult<WirtingerResult> {
    let w = wirt::wirtinger(k).map_err(err)?;
    Ok(WirtingerResult { k: w.k, tau_1: w.tau_1, c_k: w.c_k, residual: w.residual })
}

/// `c_k` from the collocated Volterra operator, independent of the determinant.
#[pyfunction]
#[pyo3(signature = (k, n_points=600))]
fn collocation_c_k(k: u32, n_points: usize) -> PyResult<f64> {
    Ok(wirt::collocation_oracle(k, n_points).map_err(err)?.c_k)
}

#[pyfunction]
fn bunched_constant(s: u32, tau: f64) -> PyResult<f64> {
    bunched_core::bunched_constant(s, tau).map_err(err)
}

#[pyfunction]
fn fusion_bounds(s: u32, tau: f64, delta: f64, m_omega: f64) -> PyResult<FrameBounds> {
    Ok(bunched_core::fusion_bounds(s, tau, delta, m_omega).map_err(err)?.into())
}

#[pyfunction]
fn divided_diff_bounds(s: u32, tau: f64, delta: f64, m_omega: f64) -> PyResult<FrameBounds> {
    Ok(bunched_core::divided_diff_bounds(s, tau, delta, m_omega).map_err(err)?.into())
}

/// Parses `0.25` or `1/4`.
#[pyfunction]
fn parse_fraction(s: &str) -> PyResult<f64> {
    tables::parse_fraction(s).map_err(err)
}

/// `(table, cell, computed, reference, deviation, passed)`.
type ComparisonRow = (String, String, f64, f64, f64, bool);

/// Every published cell compared with its computed value.
#[pyfunction]
fn compare_tables() -> PyResult<Vec<ComparisonRow>> {
    Ok(tables::compare_all()
        .map_err(err)?
        .into_iter()
        .map(|c| {
            let ok = c.passed();
            (c.table, c.cell, c.computed, c.reference, c.deviation, ok)
        })
        .collect())
}

fn ensemble(n_functions: usize, kernels: usize, seed: u64) -> Ensemble {
    Ensemble { n_functions, j: kernels, seed }
}

#[pyfunction]
#[pyo3(signature = (w, k, set, n_functions=50, kernels=8, seed=0, exploratory=false))]
fn verify_frame_1d(
    w: f64,
    k: u32,
    set: &SamplingSet1D,
    n_functions: usize,
    kernels: usize,
    seed: u64,
    exploratory: bool,
) -> PyResult<FrameReport> {
    report(harness::verify_frame_1d(w, k, &set.inner, &ensemble(n_functions, kernels, seed), exploratory))
}

#[pyfunction]
#[pyo3(signature = (w, k, spacing, half_count, n_functions=50, kernels=8, seed=0))]
fn verify_uniform_grid(
    w: f64,
    k: u32,
    spacing: f64,
    half_count: usize,
    n_functions: usize,
    kernels: usize,
    seed: u64,
) -> PyResult<FrameReport> {
    report(harness::verify_uniform_grid(w, k, spacing, half_count, &ensemble(n_functions, kernels, seed)))
}

#[pyfunction]
#[pyo3(signature = (w, k, half_count, epsilon, seed=0, n_functions=50, kernels=8))]
fn perturb_experiment(
    w: f64,
    k: u32,
    half_count: usize,
    epsilon: f64,
    seed: u64,
    n_functions: usize,
    kernels: usize,
) -> PyResult<FrameReport> {
    report(harness::perturb_experiment(w, k, half_count, epsilon, seed, &ensemble(n_functions, kernels, seed)))
}

/// Bunches of `s` points around each center; `kind` is `"fusion"` or
/// `"divdiff"`, `offsets` is `"equispaced"` or `"random"`.
#[pyfunction]
#[pyo3(signature = (w, centers, s, tau, kind="fusion", offsets="equispaced", n_functions=50, kernels=8, seed=0, exploratory=false))]
#[allow(clippy::too_many_arguments)]
fn verify_bunched(
    w: f64,
    centers: &SamplingSet1D,
    s: usize,
    tau: f64,
    kind: &str,
    offsets: &str,
    n_functions: usize,
    kernels: usize,
    seed: u64,
    exploratory: bool,
) -> PyResult<FrameReport> {
    let kind = match kind {
        "fusion" => BunchedKind::Fusion,
        "divdiff" => BunchedKind::DividedDiff,
        other => return Err(PyValueError::new_err(format!("unknown kind {other:?}"))),
    };
    let mode = match offsets {
        "equispaced" => OffsetMode::Equispaced,
        "random" => OffsetMode::Random { seed },
        other => return Err(PyValueError::new_err(format!("unknown offsets {other:?}"))),
    };
    let set = BunchedSet::generate(centers.inner.clone(), s, tau, mode).map_err(err)?;
    report(bunched_core::verify_bunched(w, &set, kind, &ensemble(n_functions, kernels, seed), exploratory))
}

#[pymodule(name = "bandsamp")]
fn bandsamp_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    register(m)
}

/// Adds every class, function and constant of the module to `m`.
pub fn register(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("PreconditionError", m.py().get_type::<PreconditionError>())?;
    m.add("REFERENCE_TOL", tables::REFERENCE_TOL)?;
    m.add_class::<FrameBounds>()?;
    m.add_class::<DensityConstant>()?;
    m.add_class::<WirtingerResult>()?;
    m.add_class::<SamplingSet1D>()?;
    m.add_class::<FrameReport>()?;
    m.add_function(wrap_pyfunction!(eval_r_k, m)?)?;
    m.add_function(wrap_pyfunction!(eval_h_k, m)?)?;
    m.add_function(wrap_pyfunction!(eval_g_kd, m)?)?;
    m.add_function(wrap_pyfunction!(constant_c, m)?)?;
    m.add_function(wrap_pyfunction!(frame_bounds_1d, m)?)?;
    m.add_function(wrap_pyfunction!(frame_bounds_dd, m)?)?;
    m.add_function(wrap_pyfunction!(perturb_bound, m)?)?;
    m.add_function(wrap_pyfunction!(perturbed_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(wirtinger, m)?)?;
    m.add_function(wrap_pyfunction!(collocation_c_k, m)?)?;
    m.add_function(wrap_pyfunction!(bunched_constant, m)?)?;
    m.add_function(wrap_pyfunction!(fusion_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(divided_diff_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(parse_fraction, m)?)?;
    m.add_function(wrap_pyfunction!(compare_tables, m)?)?;
    m.add_function(wrap_pyfunction!(verify_frame_1d, m)?)?;
    m.add_function(wrap_pyfunction!(verify_uniform_grid, m)?)?;
    m.add_function(wrap_pyfunction!(perturb_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(verify_bunched, m)?)?;
    Ok(())
}
