//! Python bindings for `hmflow-core`.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use hmflow_core::entropy_diagnostics as ed;
use hmflow_core::flow_pde as fp;
use hmflow_core::jacobi_spectral as js;
use hmflow_core::profile_ode::{self as po, Target};
use hmflow_core::weighted_geometry::RadialGrid;
use hmflow_core::Error;

fn err(e: Error) -> PyErr {
    match e {
        Error::InvalidParameter(_) | Error::InvalidGrid(_) | Error::BoundaryAngleMismatch { .. } => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn target(name: &str) -> PyResult<Target> {
    Target::parse(name).ok_or_else(|| PyValueError::new_err(format!("unknown target `{name}` (sphere or hyperbolic)")))
}

#[pyclass(name = "Grid", module = "hmflow", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyGrid(RadialGrid);

#[pymethods]
impl PyGrid {
    /// Layered grid: geometric near the origin, uniform outside.
    #[new]
    #[pyo3(signature = (rho0=1e-4, rho_max=40.0, nodes=4000))]
    fn new(rho0: f64, rho_max: f64, nodes: usize) -> PyResult<Self> {
        RadialGrid::layered(rho0, rho_max, nodes).map(Self).map_err(err)
    }

    #[getter]
    fn nodes(&self) -> Vec<f64> {
        self.0.nodes().to_vec()
    }

    fn refined(&self) -> Self {
        Self(self.0.refined())
    }

    fn extended(&self, rho_max: f64) -> PyResult<Self> {
        self.0.extended(rho_max).map(Self).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("Grid(rho0={}, rho_max={}, nodes={})", self.0.rho0(), self.0.rho_max(), self.0.len())
    }
}

fn grid_or_default(grid: Option<PyRef<'_, PyGrid>>) -> RadialGrid {
    grid.map_or_else(RadialGrid::default_layout, |g| g.0.clone())
}

#[pyclass(name = "Profile", module = "hmflow", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyProfile(po::Profile);

#[pymethods]
impl PyProfile {
    #[getter]
    fn rho(&self) -> Vec<f64> {
        self.0.grid.nodes().to_vec()
    }
    #[getter]
    fn h(&self) -> Vec<f64> {
        self.0.h.clone()
    }
    #[getter]
    fn dh(&self) -> Vec<f64> {
        self.0.dh.clone()
    }
    #[getter]
    fn n(&self) -> usize {
        self.0.n
    }
    #[getter]
    fn target(&self) -> &'static str {
        self.0.target.name()
    }
    #[getter]
    fn shoot_param(&self) -> f64 {
        self.0.shoot_param
    }
    #[getter]
    fn alpha_inf(&self) -> f64 {
        self.0.alpha_inf
    }
    #[getter]
    fn c2(&self) -> f64 {
        self.0.c2
    }
    #[getter]
    fn grid(&self) -> PyGrid {
        PyGrid(self.0.grid.clone())
    }

    fn ode_residual(&self) -> f64 {
        self.0.ode_residual()
    }

    /// `sup √f |∇u|`.
    fn gradient_bound(&self) -> f64 {
        self.0.gradient_bound()
    }

    fn is_constant(&self) -> bool {
        self.0.is_constant()
    }

    fn sup_distance(&self, other: PyRef<'_, PyProfile>) -> f64 {
        self.0.sup_distance(&other.0)
    }

    fn energy_density(&self, rho: f64) -> PyResult<f64> {
        ed::energy_density(&self.0, rho).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Profile(n={}, target={}, a={}, alpha_inf={})",
            self.0.n,
            self.0.target.name(),
            self.0.shoot_param,
            self.0.alpha_inf
        )
    }
}

/// Integrate the profile equation from slope `a` at the origin.
#[pyfunction]
#[pyo3(signature = (a, n=3, target="sphere", grid=None, rk_tol=1e-11))]
fn shoot(a: f64, n: usize, target: &str, grid: Option<PyRef<'_, PyGrid>>, rk_tol: f64) -> PyResult<PyProfile> {
    let opts = po::ShootingOptions { rk_tol, ..Default::default() };
    po::shoot(a, n, self::target(target)?, &grid_or_default(grid), opts).map(PyProfile).map_err(err)
}

/// Every expander with boundary angle `alpha` whose slope lies in `search`.
#[pyfunction]
#[pyo3(signature = (alpha, n=3, target="sphere", search=(0.0, 8.0), grid=None, samples=200, bv_tol=1e-10))]
fn solve_boundary_value(
    alpha: f64,
    n: usize,
    target: &str,
    search: (f64, f64),
    grid: Option<PyRef<'_, PyGrid>>,
    samples: usize,
    bv_tol: f64,
) -> PyResult<Vec<PyProfile>> {
    let g = grid_or_default(grid);
    let set = po::solve_boundary_value(alpha, n, self::target(target)?, search, &g, Default::default(), samples, bv_tol)
        .map_err(err)?;
    Ok(set.profiles.into_iter().map(PyProfile).collect())
}

#[pyfunction]
fn relative_entropy<'py>(py: Python<'py>, a: PyRef<'_, PyProfile>, b: PyRef<'_, PyProfile>) -> PyResult<Bound<'py, PyDict>> {
    let r = ed::relative_entropy(&a.0, &b.0, 1.0).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("value", r.value)?;
    d.set_item("value_ibp", r.value_ibp)?;
    d.set_item("truncation_bound", r.truncation_bound)?;
    d.set_item("cutoff_radius", r.cutoff_radius)?;
    d.set_item("routes_agree", r.routes_agree())?;
    Ok(d)
}

/// Frequency function at `radii` (20 default radii when omitted).
#[pyfunction]
#[pyo3(signature = (p, radii=None))]
fn frequency<'py>(py: Python<'py>, p: PyRef<'_, PyProfile>, radii: Option<Vec<f64>>) -> PyResult<Bound<'py, PyDict>> {
    let radii = radii.unwrap_or_else(|| ed::default_radii(&p.0.grid, 20));
    let r = ed::frequency(&p.0, &radii).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("radii", r.radii)?;
    d.set_item("frequency", r.frequency)?;
    d.set_item("pohozaev_residual", r.pohozaev_residual)?;
    d.set_item("strictly_increasing", r.strictly_increasing)?;
    d.set_item("gronwall_margin", r.gronwall_margin)?;
    Ok(d)
}

/// Trace at infinity of `p2 − p1`; `None` when the difference is below its noise floor.
#[pyfunction]
fn decay_fit<'py>(py: Python<'py>, p1: PyRef<'_, PyProfile>, p2: PyRef<'_, PyProfile>) -> PyResult<Option<Bound<'py, PyDict>>> {
    match ed::decay_fit(&p1.0, &p2.0) {
        Ok(f) => {
            let d = PyDict::new(py);
            d.set_item("trace", f.trace)?;
            d.set_item("fit_residual", f.fit_residual)?;
            d.set_item("window", f.window)?;
            d.set_item("points", f.points)?;
            Ok(Some(d))
        }
        Err(Error::EmptyWindow) => Ok(None),
        Err(e) => Err(err(e)),
    }
}

#[pyclass(name = "FlowState", module = "hmflow", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyFlowState(fp::FlowState);

#[pymethods]
impl PyFlowState {
    /// Constant-angle data `alpha·ramp(ρ)` at `s = 0`.
    #[staticmethod]
    #[pyo3(signature = (alpha, n=3, target="sphere", grid=None))]
    fn homogeneous(alpha: f64, n: usize, target: &str, grid: Option<PyRef<'_, PyGrid>>) -> PyResult<Self> {
        fp::init_homogeneous(alpha, n, self::target(target)?, &grid_or_default(grid)).map(Self).map_err(err)
    }

    /// Expander plus `amp·ρ·exp(−ρ²/width²)`.
    #[staticmethod]
    #[pyo3(signature = (background, amp=0.2, width=1.5))]
    fn perturbed(background: PyRef<'_, PyProfile>, amp: f64, width: f64) -> PyResult<Self> {
        fp::init_perturbed(&background.0, amp, width).map(Self).map_err(err)
    }

    #[getter]
    fn s(&self) -> f64 {
        self.0.s
    }
    #[getter]
    fn h(&self) -> Vec<f64> {
        self.0.h()
    }
    #[getter]
    fn rho(&self) -> Vec<f64> {
        self.0.grid.nodes().to_vec()
    }

    /// Step to `s_end`; returns the end state and `(s, sup|∂_s h|)` per step.
    #[pyo3(signature = (s_end, ds=0.02))]
    fn run(&self, py: Python<'_>, s_end: f64, ds: f64) -> PyResult<(Self, Vec<(f64, f64)>)> {
        let st = self.0.clone();
        let (last, trace) = py.detach(move || fp::run(&st, s_end, ds, |_, _| Ok(()))).map_err(err)?;
        Ok((Self(last), trace.residuals))
    }

    /// `(E_ibp, E_direct)` against an expander with the same boundary angle.
    fn entropy(&self, background: PyRef<'_, PyProfile>) -> PyResult<(f64, f64)> {
        let r = ed::relative_entropy(&self.0, &background.0, 1.0).map_err(err)?;
        Ok((r.value_ibp, r.value))
    }

    fn to_profile(&self) -> PyResult<PyProfile> {
        self.0.to_profile().map(PyProfile).map_err(err)
    }
}

/// Lowest `k` Jacobi eigenpairs of a profile.
#[pyfunction]
#[pyo3(signature = (p, k=6))]
fn spectrum<'py>(py: Python<'py>, p: PyRef<'_, PyProfile>, k: usize) -> PyResult<Bound<'py, PyDict>> {
    let op = js::build_operator(&p.0);
    let r = js::spectrum(&op, k).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("eigenvalues", r.eigenvalues)?;
    d.set_item("rayleigh", r.rayleigh)?;
    d.set_item("eigenvectors", r.eigenvectors)?;
    d.set_item("kernel_gap", r.kernel_gap)?;
    d.set_item("count_below_10", js::count_below(&op, 10.0))?;
    Ok(d)
}

/// Eigenvalues of `−Δ_f` on radial functions.
#[pyfunction]
#[pyo3(signature = (n=3, k=4, grid=None))]
fn scalar_spectrum(n: usize, k: usize, grid: Option<PyRef<'_, PyGrid>>) -> PyResult<Vec<f64>> {
    let op = js::scalar_operator(&grid_or_default(grid), n).map_err(err)?;
    Ok(js::spectrum(&op, k).map_err(err)?.eigenvalues)
}

/// Run the command-line front end; returns its exit code.
#[pyfunction]
fn run_cli(args: Vec<String>) -> i32 {
    hmflow_core::cli::run(std::iter::once("hmflow".to_string()).chain(args))
}

#[pymodule]
fn hmflow(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PyProfile>()?;
    m.add_class::<PyFlowState>()?;
    m.add_function(wrap_pyfunction!(shoot, m)?)?;
    m.add_function(wrap_pyfunction!(solve_boundary_value, m)?)?;
    m.add_function(wrap_pyfunction!(relative_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(frequency, m)?)?;
    m.add_function(wrap_pyfunction!(decay_fit, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(scalar_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
