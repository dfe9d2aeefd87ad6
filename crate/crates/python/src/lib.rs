//! Python bindings. Structured results cross the boundary as JSON and come
//! out as plain dicts and lists.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;

use rarita::cli::summarize;
use rarita::curvature::RuleTable;
use rarita::derivations::{check_names, document, run_checks};
use rarita::evolver::{
    apply_gauge, characteristic_speeds as speeds, find_symmetrizer, GaugeField, GaugeVariant, Lab, SimConfig,
    SpatialBasis, State, SymbolParams,
};
use rarita::ir;
use rarita::Error;

fn err(e: Error) -> PyErr {
    match e {
        Error::Numerical(m) => PyRuntimeError::new_err(m),
        e => PyValueError::new_err(e.to_string()),
    }
}

fn to_py<T: Serialize>(py: Python<'_>, v: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(PyModule::import(py, "json")?.call_method1("loads", (text,))?.unbind())
}

fn config_from(py: Python<'_>, kw: Option<&Bound<'_, PyDict>>) -> PyResult<SimConfig> {
    let Some(kw) = kw else { return Ok(SimConfig::default()) };
    let text: String = PyModule::import(py, "json")?.call_method1("dumps", (kw,))?.extract()?;
    let cfg: SimConfig = serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))?;
    cfg.validate().map_err(err)?;
    Ok(cfg)
}

/// A parsed spinor expression.
#[pyclass(name = "Expression", frozen)]
struct PyExpression(ir::Expression);

#[pymethods]
impl PyExpression {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        ir::parse(text).map(Self).map_err(err)
    }

    fn canonical(&self) -> Self {
        Self(ir::canonicalize(&self.0))
    }

    fn is_zero(&self) -> bool {
        ir::canonicalize(&self.0).is_zero()
    }

    fn __add__(&self, o: &Self) -> Self {
        Self(self.0.add(&o.0))
    }

    fn __sub__(&self, o: &Self) -> Self {
        Self(self.0.sub(&o.0))
    }

    /// Equality up to canonical form.
    fn __eq__(&self, o: &Self) -> PyResult<bool> {
        ir::equal(&self.0, &o.0).map_err(err)
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Expression({:?})", self.0.to_string())
    }
}

/// Run the symbolic checks (all of them by default) against the built-in
/// rule table or a table file.
#[pyfunction]
#[pyo3(signature = (checks=None, table=None))]
fn verify(py: Python<'_>, checks: Option<Vec<String>>, table: Option<&str>) -> PyResult<Py<PyAny>> {
    let (t, label) = match table {
        Some(p) => (RuleTable::load(std::path::Path::new(p)).map_err(err)?, p.to_string()),
        None => (RuleTable::default(), "default".to_string()),
    };
    let names: Vec<String> = checks.unwrap_or_else(|| check_names().iter().map(|s| s.to_string()).collect());
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let doc = py.detach(|| run_checks(&refs, &t).map(|r| document(r, &label))).map_err(err)?;
    to_py(py, &doc)
}

#[pyfunction]
fn list_checks() -> Vec<&'static str> {
    check_names()
}

/// The twelve characteristic speeds along `direction`, ascending.
#[pyfunction]
#[pyo3(signature = (direction=[0.0, 0.0, 1.0]))]
fn characteristic_speeds(direction: [f64; 3]) -> PyResult<Vec<f64>> {
    speeds(&SpatialBasis::default(), direction, SymbolParams::default()).map_err(err)
}

/// Candidate name and eigenvalues of the constant symmetrizer.
#[pyfunction]
fn symmetrizer(py: Python<'_>) -> PyResult<Py<PyAny>> {
    let h = find_symmetrizer(&SpatialBasis::default(), SymbolParams::default()).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("candidate", h.candidate)?;
    d.set_item("spectrum", h.spectrum)?;
    Ok(d.into_any().unbind())
}

/// Evolve with the given `SimConfig` fields and return the recorded rows.
#[pyfunction]
#[pyo3(signature = (**kw))]
fn evolve(py: Python<'_>, kw: Option<&Bound<'_, PyDict>>) -> PyResult<Py<PyAny>> {
    let cfg = config_from(py, kw)?;
    let (ts, _) = py.detach(|| rarita::evolver::evolve(&cfg)).map_err(err)?;
    to_py(py, &ts.rows)
}

/// Summarize an `evolve` CSV and classify the constraint growth.
#[pyfunction]
#[pyo3(signature = (text, threshold=100.0, floor=1e-8))]
fn report(py: Python<'_>, text: &str, threshold: f64, floor: f64) -> PyResult<Py<PyAny>> {
    to_py(py, &summarize(text, threshold, floor).map_err(err)?)
}

/// A simulation with its current state, for gauge experiments.
#[pyclass(name = "Simulation")]
struct PySimulation {
    lab: Lab,
    state: State,
}

#[pymethods]
impl PySimulation {
    #[new]
    #[pyo3(signature = (**kw))]
    fn new(py: Python<'_>, kw: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let lab = Lab::new(config_from(py, kw)?).map_err(err)?;
        let state = lab.initial_state().map_err(err)?;
        Ok(Self { lab, state })
    }

    /// `(‖T‖, ‖S‖)` for the current state.
    fn constraint_norms(&self) -> (f64, f64) {
        let (t, s) = self.lab.constraints(&self.state);
        (self.lab.norm(&t), self.lab.norm(&s))
    }

    fn energy(&self) -> f64 {
        self.lab.energy(&self.state)
    }

    /// Largest `|τ_A|` on the grid.
    fn max_tau(&self) -> f64 {
        (0..self.state.n()).flat_map(|j| self.state.tau(j)).map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Apply a random gauge shift; `variant` is "derived" or "literal".
    #[pyo3(signature = (seed, variant="derived"))]
    fn gauge(&mut self, seed: u64, variant: &str) -> PyResult<()> {
        let v = match variant {
            "derived" => GaugeVariant::Derived,
            "literal" => GaugeVariant::Literal,
            other => return Err(PyValueError::new_err(format!("unknown gauge variant `{other}`"))),
        };
        let g = GaugeField::random(&self.lab, seed);
        apply_gauge(&self.lab, &mut self.state, &g, v).map_err(err)
    }

    /// The shift that sets `τ_A` to zero.
    fn remove_tau(&mut self) -> PyResult<()> {
        let g = GaugeField::removing_tau(&self.state);
        apply_gauge(&self.lab, &mut self.state, &g, GaugeVariant::Derived).map_err(err)
    }

    /// Advance by the configured number of steps and return the rows.
    fn run(&mut self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        let ts = self.lab.run(&mut self.state).map_err(err)?;
        to_py(py, &ts.rows)
    }
}

#[pymodule]
pub fn rarita_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyExpression>()?;
    m.add_class::<PySimulation>()?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(list_checks, m)?)?;
    m.add_function(wrap_pyfunction!(characteristic_speeds, m)?)?;
    m.add_function(wrap_pyfunction!(symmetrizer, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(report, m)?)?;
    Ok(())
}
