//! Python bindings: load a project, solve its layers, plan and export paths.

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyIndexError, PyValueError};
use pyo3::prelude::*;

use fiberloom::export::{path_export, render_svg};
use fiberloom::plan::{CheckReport, LayerPathPlan, Planner};
use fiberloom::project::Project as CoreProject;
use fiberloom::report::derive_report;
use fiberloom::{Error, LayerSolution};

create_exception!(fiberloom_py, FiberloomError, PyException);
create_exception!(fiberloom_py, InfeasibleLayerError, FiberloomError);
create_exception!(fiberloom_py, GeometryError, FiberloomError);

fn to_py(e: Error) -> PyErr {
    let msg = e.to_string();
    match e {
        Error::Input(_) | Error::Validation(_) | Error::InvalidProgram(_) => PyValueError::new_err(msg),
        Error::InfeasibleLayer { .. } => InfeasibleLayerError::new_err(msg),
        Error::JunctionTooTight { .. }
        | Error::Layout { .. }
        | Error::Geometry { .. }
        | Error::SelfIntersection { .. } => GeometryError::new_err(msg),
        _ => FiberloomError::new_err(msg),
    }
}

/// Loop counts chosen for one layer.
#[pyclass(name = "LayerSolution", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyLayerSolution(LayerSolution);

#[pymethods]
impl PyLayerSolution {
    #[getter]
    fn layer(&self) -> usize {
        self.0.layer
    }
    #[getter]
    fn sheet(&self) -> usize {
        self.0.sheet
    }
    #[getter]
    fn x(&self) -> Vec<u64> {
        self.0.x.clone()
    }
    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.0.weights.clone()
    }
    #[getter]
    fn objective(&self) -> f64 {
        self.0.objective
    }
    fn __repr__(&self) -> String {
        format!(
            "LayerSolution(layer={}, sheet={}, x={:?}, objective={})",
            self.0.layer, self.0.sheet, self.0.x, self.0.objective
        )
    }
}

/// A planned layer with its radius/overlap check.
#[pyclass(name = "LayerPlan", frozen)]
struct PyLayerPlan {
    plan: LayerPathPlan,
    report: CheckReport,
    svg: String,
}

#[pymethods]
impl PyLayerPlan {
    #[getter]
    fn layer(&self) -> usize {
        self.plan.layer
    }
    #[getter]
    fn n_paths(&self) -> usize {
        self.plan.paths.len()
    }
    #[getter]
    fn n_connectors(&self) -> usize {
        self.plan.connectors.len()
    }
    #[getter]
    fn curvature_violations(&self) -> usize {
        self.report.curvature.len()
    }
    #[getter]
    fn overlap_violations(&self) -> usize {
        self.report.overlap.len()
    }
    #[getter]
    fn warnings(&self) -> Vec<String> {
        self.plan.warnings.clone()
    }
    fn is_clean(&self) -> bool {
        self.report.is_clean()
    }
    fn svg(&self) -> String {
        self.svg.clone()
    }
    /// Path export text for this layer alone.
    fn export(&self) -> String {
        path_export(std::slice::from_ref(&self.plan))
    }
}

#[pyclass(name = "Project")]
struct PyProject(CoreProject);

#[pymethods]
impl PyProject {
    #[staticmethod]
    fn load(path: std::path::PathBuf) -> PyResult<Self> {
        CoreProject::load(&path).map(PyProject).map_err(to_py)
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        CoreProject::from_toml(text).map(PyProject).map_err(to_py)
    }

    #[getter]
    fn name(&self) -> String {
        self.0.name.clone()
    }
    #[getter]
    fn n_layers(&self) -> usize {
        self.0.params.n_layers
    }
    #[setter]
    fn set_n_layers(&mut self, n: usize) {
        self.0.params.n_layers = n;
    }
    #[getter]
    fn p(&self) -> f64 {
        self.0.params.p
    }
    #[setter]
    fn set_p(&mut self, p: f64) -> PyResult<()> {
        let mut params = self.0.params.clone();
        params.p = p;
        params.validate(&self.0.graph).map_err(to_py)?;
        self.0.params = params;
        Ok(())
    }

    /// `(edge1, edge2, vertex, target)` per connection, in id order.
    fn connections(&self) -> Vec<(usize, usize, usize, f64)> {
        self.0
            .graph
            .connections
            .iter()
            .map(|c| (c.edge1, c.edge2, c.mid_vertex, c.target))
            .collect()
    }

    /// Connection ids of each loop, per sheet.
    fn loops(&self) -> Vec<Vec<Vec<usize>>> {
        self.0
            .graph
            .sheets
            .iter()
            .map(|s| s.loops.iter().map(|l| l.connections.clone()).collect())
            .collect()
    }

    fn derive_report(&self) -> String {
        derive_report(&self.0.graph)
    }

    fn optimize(&self, py: Python<'_>) -> PyResult<Vec<PyLayerSolution>> {
        let p = &self.0;
        let history = py
            .detach(|| fiberloom::pattern::solve_all_layers(&p.graph, &p.params))
            .map_err(to_py)?;
        Ok(history.layers.into_iter().map(PyLayerSolution).collect())
    }

    fn plan(&self, py: Python<'_>, solution: &PyLayerSolution) -> PyResult<PyLayerPlan> {
        let p = &self.0;
        if p.graph.sheets.get(solution.0.sheet).map(|s| s.loops.len()) != Some(solution.0.x.len()) {
            return Err(PyIndexError::new_err("solution does not match this project's sheets"));
        }
        py.detach(|| {
            let (plan, report) = Planner::new(&p.graph, p.plan)?.plan_solution(&solution.0)?;
            let svg = render_svg(&plan, &p.graph, p.plan.fiber_width, true);
            Ok(PyLayerPlan { plan, report, svg })
        })
        .map_err(to_py)
    }
}

#[pymodule]
fn fiberloom_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProject>()?;
    m.add_class::<PyLayerSolution>()?;
    m.add_class::<PyLayerPlan>()?;
    m.add("FiberloomError", m.py().get_type::<FiberloomError>())?;
    m.add("InfeasibleLayerError", m.py().get_type::<InfeasibleLayerError>())?;
    m.add("GeometryError", m.py().get_type::<GeometryError>())?;
    Ok(())
}
