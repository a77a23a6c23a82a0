//! Python bindings: shapes, functionals, flows and the Penrose check.
//!
//! ```python
//! import imcflab
//! g = imcflab.RadialGraph.from_shape(imcflab.Shape.perturbed_sphere(1.0, 0.05, 2), n=3, m=128)
//! print(g.evaluate().af_margin())
//! trace = imcflab.run_flow(g, "imcf", t_end=1.0, record_every=0.1)
//! ```

use imcf_lab::flow::{asymptotics_report, FlowOutcome};
use imcf_lab::mass::ProfileFamily;
use imcf_lab::{FlowKind, FlowSpec, LabError};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: LabError) -> PyErr {
    match e {
        LabError::Geometry { .. } | LabError::Flow { .. } | LabError::Diagnostic(_) => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

#[pyclass(frozen, name = "SphereGrid")]
struct PySphereGrid(imcf_lab::SphereGrid);

#[pymethods]
impl PySphereGrid {
    #[new]
    fn new(n: usize, m: usize) -> PyResult<Self> {
        imcf_lab::SphereGrid::new(n, m).map(Self).map_err(to_py)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.dimension()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    #[getter]
    fn phi(&self) -> Vec<f64> {
        self.0.phi().to_vec()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.0.weights().to_vec()
    }

    /// Integral over the unit sphere of an axisymmetric function sampled at the nodes.
    fn quadrature(&self, values: Vec<f64>) -> PyResult<f64> {
        self.0.quadrature(&values).map_err(to_py)
    }
}

#[pyclass(frozen, skip_from_py_object, name = "Shape")]
#[derive(Clone)]
struct PyShape(imcf_lab::ShapeSpec);

#[pymethods]
impl PyShape {
    #[staticmethod]
    fn centered_sphere(r: f64) -> Self {
        Self(imcf_lab::ShapeSpec::CenteredSphere { r })
    }

    #[staticmethod]
    fn offcenter_sphere(d: f64, radius: f64) -> Self {
        Self(imcf_lab::ShapeSpec::OffcenterSphere { d, radius })
    }

    #[staticmethod]
    fn perturbed_sphere(r: f64, eps: f64, l: u32) -> Self {
        Self(imcf_lab::ShapeSpec::PerturbedSphere { r, eps, l })
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.0)
    }
}

#[pyclass(frozen, skip_from_py_object, name = "FunctionalReport")]
#[derive(Clone, Copy)]
struct PyReport(imcf_lab::FunctionalReport);

#[pymethods]
impl PyReport {
    #[getter]
    fn area(&self) -> f64 {
        self.0.area
    }
    #[getter]
    fn i(&self) -> f64 {
        self.0.i
    }
    #[getter]
    fn j(&self) -> f64 {
        self.0.j
    }
    #[getter]
    fn kq(&self) -> f64 {
        self.0.kq
    }
    #[getter]
    fn l(&self) -> f64 {
        self.0.l
    }
    #[getter]
    fn m(&self) -> f64 {
        self.0.m
    }
    #[getter]
    fn hk_deficit(&self) -> Option<f64> {
        self.0.hk_deficit
    }
    #[getter]
    fn mink1_residual(&self) -> f64 {
        self.0.mink1_residual
    }
    #[getter]
    fn mink2_residual(&self) -> f64 {
        self.0.mink2_residual
    }
    #[getter]
    fn min_h(&self) -> f64 {
        self.0.min_h
    }
    #[getter]
    fn max_h(&self) -> f64 {
        self.0.max_h
    }

    fn af_margin(&self) -> f64 {
        self.0.af_margin()
    }

    fn bhw_margin(&self) -> f64 {
        self.0.bhw_margin()
    }

    /// Values in CSV column order, with `t` first.
    #[pyo3(signature = (t=0.0))]
    fn csv_values(&self, t: f64) -> Vec<f64> {
        self.0.csv_values(t).to_vec()
    }

    #[staticmethod]
    fn columns() -> Vec<&'static str> {
        imcf_lab::functionals::CSV_COLUMNS.to_vec()
    }

    fn __repr__(&self) -> String {
        format!(
            "FunctionalReport(A={:.6e}, L={:.6e}, af_margin={:.3e})",
            self.0.area,
            self.0.l,
            self.0.af_margin()
        )
    }
}

#[pyclass(frozen, name = "RadialGraph")]
struct PyRadialGraph(imcf_lab::RadialGraph);

#[pymethods]
impl PyRadialGraph {
    #[staticmethod]
    fn from_shape(shape: &PyShape, n: usize, m: usize) -> PyResult<Self> {
        let grid = imcf_lab::SphereGrid::new(n, m).map_err(to_py)?;
        imcf_lab::build(&shape.0, &grid).map(Self).map_err(to_py)
    }

    /// Graph with radial values `u` at the cell centres of an `n`-dimensional grid.
    #[staticmethod]
    fn from_values(n: usize, u: Vec<f64>) -> PyResult<Self> {
        let grid = imcf_lab::SphereGrid::new(n, u.len()).map_err(to_py)?;
        imcf_lab::RadialGraph::new(grid, u.into()).map(Self).map_err(to_py)
    }

    #[getter]
    fn u(&self) -> Vec<f64> {
        self.0.u().values().to_vec()
    }

    #[getter]
    fn phi(&self) -> Vec<f64> {
        self.0.grid().phi().to_vec()
    }

    fn evaluate(&self) -> PyResult<PyReport> {
        let fields = imcf_lab::compute_fields(&self.0).map_err(to_py)?;
        imcf_lab::evaluate(self.0.grid(), &fields).map(PyReport).map_err(to_py)
    }

    /// Pointwise geometry as a dict of lists.
    fn fields<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let f = imcf_lab::compute_fields(&self.0).map_err(to_py)?;
        let d = PyDict::new(py);
        for (k, v) in [
            ("rho", &f.rho),
            ("w", &f.w),
            ("kappa_rad", &f.kappa_rad),
            ("kappa_ang", &f.kappa_ang),
            ("h", &f.h),
            ("sigma2", &f.sigma2),
            ("p", &f.p),
            ("d_sigma", &f.d_sigma),
        ] {
            d.set_item(k, v.values().to_vec())?;
        }
        Ok(d)
    }
}

#[pyclass(frozen, name = "FlowTrace")]
struct PyFlowTrace(imcf_lab::FlowTrace);

#[pymethods]
impl PyFlowTrace {
    #[getter]
    fn times(&self) -> Vec<f64> {
        self.0.times()
    }

    #[getter]
    fn reports(&self) -> Vec<PyReport> {
        self.0.rows.iter().map(|r| PyReport(r.report)).collect()
    }

    #[getter]
    fn crossing_t0(&self) -> Option<f64> {
        self.0.crossing_t0
    }

    /// `completed`, `extinct`, `unresolved` or `aborted`.
    #[getter]
    fn status(&self) -> &'static str {
        match self.0.outcome {
            FlowOutcome::Completed => "completed",
            FlowOutcome::Extinct { .. } => "extinct",
            FlowOutcome::Unresolved { .. } => "unresolved",
            FlowOutcome::Aborted { .. } => "aborted",
        }
    }

    #[getter]
    fn extinction_time(&self) -> Option<f64> {
        match self.0.outcome {
            FlowOutcome::Extinct { t_star, .. } => Some(t_star),
            _ => None,
        }
    }

    #[getter]
    fn final_u(&self) -> Vec<f64> {
        self.0.final_graph.u().values().to_vec()
    }

    /// Decay-rate fits and limit margins of an inverse mean curvature flow trace.
    fn asymptotics<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let a = asymptotics_report(&self.0).map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("kappa_rate", a.kappa_rate)?;
        d.set_item("dv_rate", a.dv_rate)?;
        d.set_item("reference_rate", a.reference_rate)?;
        d.set_item("limit_profile", a.limit_profile)?;
        d.set_item("limit_profile_oscillation", a.limit_profile_oscillation)?;
        d.set_item("l_margin_final", a.l_margin_final)?;
        d.set_item("l_margin_min", a.l_margin_min)?;
        Ok(d)
    }
}

fn flow_kind(kind: &str) -> PyResult<FlowKind> {
    match kind {
        "imcf" => Ok(FlowKind::Imcf),
        "brendle" => Ok(FlowKind::Brendle),
        _ => Err(PyValueError::new_err(format!("unknown flow {kind:?}; expected \"imcf\" or \"brendle\""))),
    }
}

#[pyfunction]
#[pyo3(signature = (graph, kind, t_end, record_every, cfl=0.2, max_dt=None, fixed_dt=None))]
#[allow(clippy::too_many_arguments)]
fn run_flow(
    py: Python<'_>,
    graph: &PyRadialGraph,
    kind: &str,
    t_end: f64,
    record_every: f64,
    cfl: f64,
    max_dt: Option<f64>,
    fixed_dt: Option<f64>,
) -> PyResult<PyFlowTrace> {
    let spec = FlowSpec { cfl, max_dt, fixed_dt, ..FlowSpec::new(flow_kind(kind)?, t_end, record_every) };
    let g = graph.0.clone();
    py.detach(|| imcf_lab::run(&g, &spec)).map(PyFlowTrace).map_err(to_py)
}

#[pyfunction]
fn unit_sphere_area(k: usize) -> PyResult<f64> {
    imcf_lab::unit_sphere_area(k).map_err(to_py)
}

#[pyfunction]
fn horizon_radius(m: f64, n: usize) -> PyResult<f64> {
    imcf_lab::horizon_radius(m, n).map_err(to_py)
}

#[pyfunction]
fn sphere_closed_forms<'py>(py: Python<'py>, r: f64, n: usize) -> PyResult<Bound<'py, PyDict>> {
    let c = imcf_lab::sphere_closed_forms(r, n).map_err(to_py)?;
    let d = PyDict::new(py);
    for (k, v) in [("A", c.area), ("H", c.h), ("p", c.p), ("I", c.i), ("J", c.j), ("Kq", c.kq), ("L", c.l), ("M", c.m)] {
        d.set_item(k, v)?;
    }
    Ok(d)
}

/// Mass breakdown and Penrose verdict. `family` is `adss`, `graph_bump`
/// (needs `eps`) or `mass_shell` (needs `delta_m` and `width`).
#[pyfunction]
#[pyo3(signature = (n, family, m, eps=None, delta_m=None, width=None, r_max=40.0, node_count=1201))]
#[allow(clippy::too_many_arguments)]
fn penrose_check<'py>(
    py: Python<'py>,
    n: usize,
    family: &str,
    m: f64,
    eps: Option<f64>,
    delta_m: Option<f64>,
    width: Option<f64>,
    r_max: f64,
    node_count: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let missing = |name: &str| PyValueError::new_err(format!("family {family:?} needs {name}"));
    let fam = match family {
        "adss" => ProfileFamily::Adss { m },
        "graph_bump" => ProfileFamily::GraphBump { m, eps: eps.ok_or_else(|| missing("eps"))? },
        "mass_shell" => ProfileFamily::MassShell {
            m,
            delta_m: delta_m.ok_or_else(|| missing("delta_m"))?,
            width: width.ok_or_else(|| missing("width"))?,
        },
        _ => return Err(PyValueError::new_err(format!("unknown profile family {family:?}"))),
    };
    let profile = imcf_lab::build_profile(n, fam, r_max, node_count).map_err(to_py)?;
    let v = imcf_lab::penrose_check(&profile).map_err(to_py)?;
    let b = v.breakdown;
    let d = PyDict::new(py);
    d.set_item("horizon_r", profile.horizon_r)?;
    d.set_item("bulk", b.bulk)?;
    d.set_item("horizon", b.horizon)?;
    d.set_item("mass_formula_total", b.mass_formula_total)?;
    d.set_item("mass_functional_limit", b.mass_functional_limit)?;
    d.set_item("penrose_rhs", b.penrose_rhs)?;
    d.set_item("margin", v.margin)?;
    d.set_item("cross_oracle_gap", v.cross_oracle_gap)?;
    d.set_item("equality", v.equality)?;
    d.set_item("min_mass_aspect_density", b.min_mass_aspect_density)?;
    Ok(d)
}

#[pymodule]
fn imcflab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySphereGrid>()?;
    m.add_class::<PyShape>()?;
    m.add_class::<PyReport>()?;
    m.add_class::<PyRadialGraph>()?;
    m.add_class::<PyFlowTrace>()?;
    m.add_function(wrap_pyfunction!(run_flow, m)?)?;
    m.add_function(wrap_pyfunction!(unit_sphere_area, m)?)?;
    m.add_function(wrap_pyfunction!(horizon_radius, m)?)?;
    m.add_function(wrap_pyfunction!(sphere_closed_forms, m)?)?;
    m.add_function(wrap_pyfunction!(penrose_check, m)?)?;
    Ok(())
}
