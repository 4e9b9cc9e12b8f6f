use std::path::PathBuf;

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyTypeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBool, PyDict, PyFloat, PyInt, PyList, PyString};

use scramble_core::linalg::{haar_unitary as core_haar, BipartiteSpace, ComplexMatrix};
use scramble_core::liouville::{build_adjoint_liouvillian, build_state_liouvillian, check_cptp, propagate};
use scramble_core::models::{build_dicke, build_ising, build_tc, AtomFieldParams, IsingParams, ModelKind, ModelSpec};
use scramble_core::scenario::{run_scenario, ScenarioConfig, ScenarioError};
use scramble_core::scrambling::{self, build_swaps, HeisenbergDynamics, OtocSeries};
use scramble_core::thermo::{self, DensityMatrix, Subsystem};

fn core_err(e: scramble_core::Error) -> PyErr {
    use scramble_core::Error::*;
    match e {
        InvalidParameter(_)
        | DimensionMismatch(_)
        | InvalidState(_)
        | NotHermitian { .. }
        | NotPositive { .. }
        | NotSquare { .. } => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn scenario_err(e: ScenarioError) -> PyErr {
    match e {
        ScenarioError::Validation(_) => PyValueError::new_err(e.to_string()),
        ScenarioError::Runtime(_) => PyRuntimeError::new_err(e.to_string()),
    }
}

fn to_toml(obj: &Bound<'_, PyAny>) -> PyResult<toml::Value> {
    if obj.is_instance_of::<PyBool>() {
        Ok(toml::Value::Boolean(obj.extract()?))
    } else if obj.is_instance_of::<PyInt>() {
        Ok(toml::Value::Integer(obj.extract()?))
    } else if obj.is_instance_of::<PyFloat>() {
        Ok(toml::Value::Float(obj.extract()?))
    } else if obj.is_instance_of::<PyString>() {
        Ok(toml::Value::String(obj.extract()?))
    } else if let Ok(list) = obj.cast::<PyList>() {
        list.iter().map(|x| to_toml(&x)).collect::<PyResult<_>>().map(toml::Value::Array)
    } else {
        Err(PyTypeError::new_err(format!("unsupported parameter value {obj}")))
    }
}

fn params_from<T: serde::de::DeserializeOwned>(kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<T> {
    let mut table = toml::Table::new();
    if let Some(kwargs) = kwargs {
        for (k, v) in kwargs.iter() {
            table.insert(k.extract()?, to_toml(&v)?);
        }
    }
    toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| PyValueError::new_err(e.to_string()))
}

fn to_rows(m: &ComplexMatrix) -> Vec<Vec<Complex64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

fn from_rows(rows: Vec<Vec<Complex64>>) -> PyResult<ComplexMatrix> {
    let n = rows.len();
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(PyValueError::new_err("rows have unequal lengths"));
    }
    ComplexMatrix::new(n, cols, rows.into_iter().flatten().collect()).map_err(core_err)
}

/// A Dicke, Tavis-Cummings or tilted-Ising model on `A (x) B`.
#[pyclass(name = "Model", frozen)]
struct PyModel {
    spec: ModelSpec,
    ground_index: usize,
}

fn series_values(s: OtocSeries) -> Vec<f64> {
    s.values
}

#[pymethods]
impl PyModel {
    /// Keyword arguments: omega0, omegac, lambda, n_atoms, n_max, gamma, kappa, temp_a, temp_b.
    #[staticmethod]
    #[pyo3(signature = (**params))]
    fn dicke(params: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let p: AtomFieldParams = params_from(params)?;
        Ok(Self {
            spec: build_dicke(&p).map_err(core_err)?,
            ground_index: p.atomic_ground_index(),
        })
    }

    /// Same keywords as `dicke`, without counter-rotating terms.
    #[staticmethod]
    #[pyo3(signature = (**params))]
    fn tc(params: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let p: AtomFieldParams = params_from(params)?;
        Ok(Self {
            spec: build_tc(&p).map_err(core_err)?,
            ground_index: p.atomic_ground_index(),
        })
    }

    /// Keyword arguments: n_spins, split, b_field, theta, coupling, gamma,
    /// bath_topology ("uniform" or "boundary"), temperatures, boundary_bond_scale.
    #[staticmethod]
    #[pyo3(signature = (**params))]
    fn ising(params: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let p: IsingParams = params_from(params)?;
        Ok(Self {
            spec: build_ising(&p).map_err(core_err)?,
            ground_index: p.subsystem_a_ground_index(),
        })
    }

    #[getter]
    fn kind(&self) -> &'static str {
        match self.spec.kind {
            ModelKind::Dicke => "dicke",
            ModelKind::Tc => "tc",
            ModelKind::Ising => "ising",
        }
    }

    #[getter]
    fn dim(&self) -> usize {
        self.spec.dim()
    }

    #[getter]
    fn d_a(&self) -> usize {
        self.spec.space.d_a()
    }

    #[getter]
    fn d_b(&self) -> usize {
        self.spec.space.d_b()
    }

    #[getter]
    fn is_closed(&self) -> bool {
        self.spec.is_closed()
    }

    #[getter]
    fn jump_labels(&self) -> Vec<String> {
        self.spec.jumps.iter().map(|j| j.label.clone()).collect()
    }

    fn hamiltonian(&self) -> Vec<Vec<Complex64>> {
        to_rows(&self.spec.hamiltonian)
    }

    /// Closed-form unitary OTOC, ignoring any dissipation.
    fn otoc_unitary(&self, py: Python<'_>, times: Vec<f64>) -> PyResult<Vec<f64>> {
        let spec = &self.spec;
        py.detach(|| scrambling::otoc_unitary(&spec.hamiltonian, spec.space, &times))
            .map(series_values)
            .map_err(core_err)
    }

    /// Closed-form open-system OTOC of the GKSL propagator.
    fn otoc_open(&self, py: Python<'_>, times: Vec<f64>) -> PyResult<Vec<f64>> {
        let spec = &self.spec;
        py.detach(|| {
            let generator = build_adjoint_liouvillian(spec)?;
            scrambling::otoc_open_streaming(&generator, &times, spec.space)
        })
        .map(series_values)
        .map_err(core_err)
    }

    fn operator_entanglement(&self, py: Python<'_>, times: Vec<f64>) -> PyResult<Vec<f64>> {
        let spec = &self.spec;
        py.detach(|| scrambling::operator_entanglement(&spec.hamiltonian, spec.space, &times))
            .map(series_values)
            .map_err(core_err)
    }

    /// Monte-Carlo OTOC; returns `(means, standard_errors)`.
    #[pyo3(signature = (times, n_pairs=200, seed=0, open=false))]
    fn otoc_haar_mc(
        &self,
        py: Python<'_>,
        times: Vec<f64>,
        n_pairs: usize,
        seed: u64,
        open: bool,
    ) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let spec = &self.spec;
        let series = py
            .detach(|| {
                if open {
                    let props = propagate(&build_adjoint_liouvillian(spec)?, &times)?;
                    scrambling::otoc_haar_mc(HeisenbergDynamics::Channel(&props), spec.space, n_pairs, seed)
                } else {
                    let dynamics = HeisenbergDynamics::Unitary {
                        hamiltonian: &spec.hamiltonian,
                        times: &times,
                    };
                    scrambling::otoc_haar_mc(dynamics, spec.space, n_pairs, seed)
                }
            })
            .map_err(core_err)?;
        let stderr = series.stderr.unwrap_or_default();
        Ok((series.values, stderr))
    }

    /// Unitary entropy bookkeeping from `|g><g|_A (x) I_B / d_B`, `g` the
    /// lowest-z basis state of `A`. Keys: sigma, s_corr, sum, env_relative.
    fn entropy_production_unitary<'py>(&self, py: Python<'py>, times: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
        let spec = &self.spec;
        let ground = self.ground_index;
        let s = py
            .detach(|| {
                let (rho_s, rho_e) = thermo::ground_mixed_product(spec.space, ground)?;
                thermo::entropy_production_unitary(&spec.hamiltonian, spec.space, &rho_s, &rho_e, &times)
            })
            .map_err(core_err)?;
        let out = PyDict::new(py);
        out.set_item("t", s.times)?;
        out.set_item("sigma", s.sigma)?;
        out.set_item("s_corr", s.s_corr)?;
        out.set_item("sum", s.sum)?;
        out.set_item("env_relative", s.env_relative)?;
        Ok(out)
    }

    /// GKSL entropy production relative to the Gibbs state at `temperature`.
    fn entropy_production_gksl(&self, py: Python<'_>, times: Vec<f64>, temperature: f64) -> PyResult<Vec<f64>> {
        let spec = &self.spec;
        let ground = self.ground_index;
        py.detach(|| {
            let (rho_s, rho_e) = thermo::ground_mixed_product(spec.space, ground)?;
            let rho0 = rho_s.tensor(&rho_e);
            thermo::entropy_production_gksl(spec, &rho0, &times, temperature)
        })
        .map(|s| s.sigma)
        .map_err(core_err)
    }

    /// CPTP diagnostics of both generators; returns a dict with `passed` and `failures`.
    fn check_cptp<'py>(&self, py: Python<'py>, times: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
        let spec = &self.spec;
        let (adj, st) = py
            .detach(|| -> scramble_core::Result<_> {
                Ok((
                    check_cptp(&build_adjoint_liouvillian(spec)?, &times)?,
                    check_cptp(&build_state_liouvillian(spec)?, &times)?,
                ))
            })
            .map_err(core_err)?;
        let out = PyDict::new(py);
        out.set_item("passed", adj.passed() && st.passed())?;
        let mut failures = adj.failures();
        failures.extend(st.failures());
        out.set_item("failures", failures)?;
        let min_choi = adj
            .samples
            .iter()
            .chain(&st.samples)
            .map(|s| s.choi_min_eigenvalue)
            .fold(f64::INFINITY, f64::min);
        out.set_item("min_choi_eigenvalue", min_choi)?;
        Ok(out)
    }

    fn __repr__(&self) -> String {
        format!(
            "Model(kind={:?}, d_a={}, d_b={}, jumps={})",
            self.kind(),
            self.d_a(),
            self.d_b(),
            self.spec.jumps.len()
        )
    }
}

/// A parsed scenario file.
#[pyclass(name = "Scenario", frozen)]
struct PyScenario {
    cfg: ScenarioConfig,
}

#[pymethods]
impl PyScenario {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let cfg = ScenarioConfig::load(&path).map_err(scenario_err)?;
        cfg.validate().map_err(scenario_err)?;
        Ok(Self { cfg })
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        let cfg = ScenarioConfig::from_toml(text).map_err(scenario_err)?;
        cfg.validate().map_err(scenario_err)?;
        Ok(Self { cfg })
    }

    #[getter]
    fn name(&self) -> String {
        self.cfg.name.clone()
    }

    fn to_toml(&self) -> String {
        self.cfg.to_toml()
    }

    /// Copy with a dotted parameter (e.g. `model.lambda`) replaced.
    fn with_parameter(&self, parameter: &str, value: &Bound<'_, PyAny>) -> PyResult<Self> {
        let cfg = self.cfg.with_parameter(parameter, &to_toml(value)?).map_err(scenario_err)?;
        cfg.validate().map_err(scenario_err)?;
        Ok(Self { cfg })
    }

    /// One scenario per sweep value: list of `(label, Scenario)`.
    fn expand(&self) -> PyResult<Vec<(Option<String>, PyScenario)>> {
        Ok(self
            .cfg
            .expand()
            .map_err(scenario_err)?
            .into_iter()
            .map(|(label, cfg)| (label, PyScenario { cfg }))
            .collect())
    }

    /// Runs a scenario without a sweep; returns `{column: values}`.
    fn run<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        if self.cfg.sweep.is_some() {
            return Err(PyValueError::new_err("scenario declares a sweep; call expand() first"));
        }
        let cfg = &self.cfg;
        let table = py.detach(|| run_scenario(cfg)).map_err(scenario_err)?;
        let out = PyDict::new(py);
        for (k, name) in table.columns.iter().enumerate() {
            let column: Vec<f64> = table.rows.iter().map(|r| r[k]).collect();
            out.set_item(name, column)?;
        }
        Ok(out)
    }

    fn __repr__(&self) -> String {
        format!("Scenario(name={:?})", self.cfg.name)
    }
}

/// Bipartite OTOC of a unitary given as rows of complex numbers.
#[pyfunction]
fn otoc_of_unitary(u: Vec<Vec<Complex64>>, d_a: usize, d_b: usize) -> PyResult<f64> {
    let swaps = build_swaps(BipartiteSpace::new(d_a, d_b).map_err(core_err)?);
    scrambling::otoc_of_unitary(&from_rows(u)?, &swaps).map_err(core_err)
}

#[pyfunction]
fn operator_entanglement_of(u: Vec<Vec<Complex64>>, d_a: usize, d_b: usize) -> PyResult<f64> {
    let space = BipartiteSpace::new(d_a, d_b).map_err(core_err)?;
    scrambling::operator_entanglement_of(&from_rows(u)?, space).map_err(core_err)
}

#[pyfunction]
fn haar_unitary(dim: usize, seed: u64) -> Vec<Vec<Complex64>> {
    to_rows(&core_haar(dim, seed))
}

/// Von Neumann entropy (natural log) of a density matrix.
#[pyfunction]
fn vn_entropy(rho: Vec<Vec<Complex64>>) -> PyResult<f64> {
    let rho = DensityMatrix::new(from_rows(rho)?, Subsystem::SE).map_err(core_err)?;
    thermo::vn_entropy(&rho).map_err(core_err)
}

/// `S(rho || sigma)`; `inf` when the support condition fails.
#[pyfunction]
fn rel_entropy(rho: Vec<Vec<Complex64>>, sigma: Vec<Vec<Complex64>>) -> PyResult<f64> {
    let rho = DensityMatrix::new(from_rows(rho)?, Subsystem::SE).map_err(core_err)?;
    let sigma = DensityMatrix::new(from_rows(sigma)?, Subsystem::SE).map_err(core_err)?;
    thermo::rel_entropy(&rho, &sigma).map(|r| r.value()).map_err(core_err)
}

/// Built-in invariant checks as `(name, passed, detail)` triples.
#[pyfunction]
fn run_checks(py: Python<'_>) -> Vec<(String, bool, String)> {
    py.detach(scramble_core::checks::run_checks)
        .into_iter()
        .map(|c| (c.name.to_string(), c.passed, c.detail))
        .collect()
}

#[pymodule]
fn scramble(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModel>()?;
    m.add_class::<PyScenario>()?;
    m.add_function(wrap_pyfunction!(otoc_of_unitary, m)?)?;
    m.add_function(wrap_pyfunction!(operator_entanglement_of, m)?)?;
    m.add_function(wrap_pyfunction!(haar_unitary, m)?)?;
    m.add_function(wrap_pyfunction!(vn_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(rel_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(run_checks, m)?)?;
    Ok(())
}
