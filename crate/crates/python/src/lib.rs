//! Python bindings: scenarios, simulation records and the closed-form analyses.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use swingvi_core::analysis::{classify_stability, p_delta_curve};
use swingvi_core::limiter::{critical_angle, variable_vi_gain, Strategy};
use swingvi_core::phasor::Phasor;
use swingvi_core::scenario::{builtin_case, load_scenario, Scenario as CoreScenario, CASE_IDS};
use swingvi_core::trajectory::full_cycle;
use swingvi_core::{run_scenario, Error, SimulationRecord, SystemParams};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(e) => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn strategy(s: &str) -> PyResult<Strategy> {
    s.parse().map_err(PyValueError::new_err)
}

/// A validated simulation scenario.
#[pyclass(name = "Scenario")]
struct PyScenario {
    inner: CoreScenario,
}

#[pymethods]
impl PyScenario {
    /// Built-in case by id, e.g. "caseA1".
    #[staticmethod]
    fn case(id: &str) -> PyResult<Self> {
        Ok(Self { inner: builtin_case(id).map_err(to_py)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: CoreScenario::from_json(text).map_err(to_py)? })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self { inner: load_scenario(path).map_err(to_py)? })
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(to_py)
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    #[getter]
    fn strategy(&self) -> String {
        self.inner.limiter.strategy.to_string()
    }

    #[setter]
    fn set_strategy(&mut self, value: &str) -> PyResult<()> {
        self.inner.limiter.strategy = strategy(value)?;
        Ok(())
    }

    #[getter]
    fn horizon(&self) -> f64 {
        self.inner.horizon
    }

    #[getter]
    fn dt(&self) -> f64 {
        self.inner.dt
    }

    fn simulate(&self) -> PyResult<Record> {
        Ok(Record { inner: run_scenario(&self.inner).map_err(to_py)? })
    }

    fn __repr__(&self) -> String {
        format!("Scenario(name={:?}, strategy={})", self.inner.name, self.inner.limiter.strategy)
    }
}

/// Sampled output of one simulation.
#[pyclass]
struct Record {
    inner: SimulationRecord,
}

#[pymethods]
impl Record {
    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn t(&self) -> Vec<f64> {
        self.inner.t.clone()
    }

    #[getter]
    fn delta(&self) -> Vec<f64> {
        self.inner.delta.clone()
    }

    #[getter]
    fn omega_dev(&self) -> Vec<f64> {
        self.inner.omega_dev.clone()
    }

    #[getter]
    fn i_mag(&self) -> Vec<f64> {
        self.inner.i_mag.clone()
    }

    #[getter]
    fn p_e(&self) -> Vec<f64> {
        self.inner.p_e.clone()
    }

    /// Apparent impedance per sample; `None` at zero current.
    #[getter]
    fn z_app(&self) -> Vec<Option<Phasor>> {
        self.inner.z_app.clone()
    }

    #[getter]
    fn psb(&self) -> Vec<bool> {
        self.inner.psb.clone()
    }

    #[getter]
    fn ost(&self) -> Vec<bool> {
        self.inner.ost.clone()
    }

    /// `(t, event, target)` tuples from the relay log.
    #[getter]
    fn relay_events(&self) -> Vec<(f64, String, String)> {
        self.inner
            .relay_events
            .iter()
            .map(|e| (e.t, e.kind.name().to_string(), e.kind.target()))
            .collect()
    }

    /// `{"classification", "max_delta_excursion", "pole_slips"}`.
    fn verdict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let v = classify_stability(&self.inner).map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("classification", v.classification.as_str())?;
        d.set_item("max_delta_excursion", v.max_delta_excursion)?;
        d.set_item("pole_slips", v.pole_slips)?;
        Ok(d)
    }
}

/// `(δ_th, δ_lim)` for the reference parameters, radians.
#[pyfunction]
fn boundary_angles() -> PyResult<(f64, f64)> {
    let p = SystemParams::default();
    Ok((
        critical_angle(&p, p.i_th).map_err(to_py)?,
        critical_angle(&p, p.i_max).map_err(to_py)?,
    ))
}

/// Variable-VI gain designed for a bolted terminal fault.
#[pyfunction]
fn variable_gain() -> PyResult<f64> {
    variable_vi_gain(&SystemParams::default()).map_err(to_py)
}

/// Closed-form full-cycle trajectory as `(delta, z_app, segment)` tuples.
#[pyfunction]
#[pyo3(signature = (strategy_name, samples = 3600))]
fn trajectory(strategy_name: &str, samples: usize) -> PyResult<Vec<(f64, Phasor, &'static str)>> {
    let traj = full_cycle(strategy(strategy_name)?, &SystemParams::default(), samples).map_err(to_py)?;
    Ok(traj.into_iter().map(|s| (s.delta, s.z_app, s.segment.as_str())).collect())
}

/// Quasi-static P-δ curve as `(delta, p, vi_active)` tuples over [0, 2π].
#[pyfunction]
#[pyo3(signature = (strategy_name, samples = 10_000))]
fn p_delta(strategy_name: &str, samples: usize) -> PyResult<Vec<(f64, f64, bool)>> {
    let s = strategy(strategy_name)?;
    let scenario = CoreScenario::default();
    let curve = p_delta_curve(s, &scenario.system, &scenario.limiter, samples).map_err(to_py)?;
    Ok(curve.samples.into_iter().map(|x| (x.delta, x.p, x.vi_active)).collect())
}

#[pymodule]
fn swingvi(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScenario>()?;
    m.add_class::<Record>()?;
    m.add_function(wrap_pyfunction!(boundary_angles, m)?)?;
    m.add_function(wrap_pyfunction!(variable_gain, m)?)?;
    m.add_function(wrap_pyfunction!(trajectory, m)?)?;
    m.add_function(wrap_pyfunction!(p_delta, m)?)?;
    m.add("CASE_IDS", CASE_IDS.to_vec())?;
    Ok(())
}
