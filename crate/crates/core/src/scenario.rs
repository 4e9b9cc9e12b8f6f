//! Declarative scenarios: TOML config -> model -> observables -> CSV table.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::linalg::{kron, BipartiteSpace};
use crate::liouville::{build_adjoint_liouvillian, PropagatorStream};
use crate::models::{
    build_dicke, build_ising, build_tc, ising_block_hamiltonian, AtomFieldParams, BathTopology, IsingParams, ModelSpec,
};
use crate::scrambling::{
    build_swaps, haar_mc_estimate, open_otoc_value, operator_entanglement, otoc_haar_mc, otoc_unitary,
    HeisenbergDynamics, DEFAULT_MC_PAIRS,
};
use crate::thermo::{
    entropy_production_gksl, entropy_production_unitary, hamiltonian_ground_state, DensityMatrix, Subsystem,
};

pub const ARTIFACT_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScenarioError {
    Validation(String),
    Runtime(String),
}

impl ScenarioError {
    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::Validation(_) => 1,
            ScenarioError::Runtime(_) => 2,
        }
    }

    fn context(self, ctx: &str) -> Self {
        match self {
            ScenarioError::Validation(m) => ScenarioError::Validation(format!("{ctx}: {m}")),
            ScenarioError::Runtime(m) => ScenarioError::Runtime(format!("{ctx}: {m}")),
        }
    }
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioError::Validation(m) => write!(f, "validation error: {m}"),
            ScenarioError::Runtime(m) => write!(f, "runtime error: {m}"),
        }
    }
}

impl std::error::Error for ScenarioError {}

fn invalid(msg: impl Into<String>) -> ScenarioError {
    ScenarioError::Validation(msg.into())
}

fn runtime(e: Error) -> ScenarioError {
    ScenarioError::Runtime(e.to_string())
}

/// Parameter errors surface as validation errors, anything else as runtime.
fn classify(e: Error) -> ScenarioError {
    match e {
        Error::InvalidParameter(m) => ScenarioError::Validation(m),
        other => ScenarioError::Runtime(other.to_string()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelConfig {
    Dicke(AtomFieldParams),
    Tc(AtomFieldParams),
    Ising(IsingParams),
}

impl ModelConfig {
    pub fn build(&self) -> crate::Result<ModelSpec> {
        match self {
            ModelConfig::Dicke(p) => build_dicke(p),
            ModelConfig::Tc(p) => build_tc(p),
            ModelConfig::Ising(p) => build_ising(p),
        }
    }

    /// A single temperature shared by every bath, if there is one.
    pub fn shared_temperature(&self) -> Option<f64> {
        let temps: Vec<f64> = match self {
            ModelConfig::Dicke(p) | ModelConfig::Tc(p) => vec![p.temp_a, p.temp_b],
            ModelConfig::Ising(p) => p.temperatures.clone(),
        };
        let first = *temps.first()?;
        temps.iter().all(|&t| t == first).then_some(first)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DynamicsKind {
    Unitary,
    Gksl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    OtocUnitary,
    OtocOpen,
    OtocHaarMc,
    OpEntanglement,
    EntropyProduction,
    CorrelationEntropy,
}

impl Observable {
    pub fn column(self) -> &'static str {
        match self {
            Observable::OtocUnitary => "otoc_unitary",
            Observable::OtocOpen => "otoc_open",
            Observable::OtocHaarMc => "otoc_haar_mc",
            Observable::OpEntanglement => "op_entanglement",
            Observable::EntropyProduction => "entropy_production",
            Observable::CorrelationEntropy => "correlation_entropy",
        }
    }

    fn allowed(self, dynamics: DynamicsKind) -> bool {
        use Observable::*;
        match dynamics {
            DynamicsKind::Unitary => !matches!(self, OtocOpen),
            DynamicsKind::Gksl => matches!(self, OtocOpen | OtocHaarMc | EntropyProduction),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub n_points: usize,
}

impl TimeGrid {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.n_points == 0 {
            return Err(invalid("time_grid.n_points must be >= 1"));
        }
        if !self.t_start.is_finite() || self.t_start < 0.0 {
            return Err(invalid(format!("time_grid.t_start must be finite and >= 0, got {}", self.t_start)));
        }
        if !self.t_end.is_finite() || self.t_end < self.t_start {
            return Err(invalid(format!(
                "time_grid.t_end must be finite and >= t_start, got {}",
                self.t_end
            )));
        }
        if self.n_points > 1 && self.t_end == self.t_start {
            return Err(invalid("time_grid.t_end must exceed t_start when n_points > 1"));
        }
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        if self.n_points == 1 {
            return vec![self.t_start];
        }
        let dt = (self.t_end - self.t_start) / (self.n_points - 1) as f64;
        (0..self.n_points).map(|k| self.t_start + k as f64 * dt).collect()
    }
}

/// Initial state of subsystem `A` for entropy observables; `B` starts maximally mixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// Lowest `sigma_z` / `J_z` basis state.
    #[default]
    LowestZ,
    /// Ground state of the Hamiltonian restricted to `A`.
    BlockGround,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    /// Dotted path into the config; several paths joined by `+` move together.
    pub parameter: String,
    pub values: Vec<toml::Value>,
}

fn default_mc_pairs() -> usize {
    DEFAULT_MC_PAIRS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub dynamics: DynamicsKind,
    pub observables: Vec<Observable>,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default = "default_mc_pairs")]
    pub mc_pairs: usize,
    #[serde(default)]
    pub initial_state: InitialState,
    /// Temperature of the reference Gibbs state for GKSL entropy production.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equilibrium_temperature: Option<f64>,
    pub output: PathBuf,
    pub model: ModelConfig,
    pub time_grid: TimeGrid,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepAxis>,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, ScenarioError> {
        toml::from_str(text).map_err(|e| invalid(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| e.context(&path.display().to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario configs serialize")
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.time_grid.validate()?;
        if self.observables.is_empty() {
            return Err(invalid("observables must not be empty"));
        }
        let unique: BTreeSet<_> = self.observables.iter().collect();
        if unique.len() != self.observables.len() {
            return Err(invalid("observables contain duplicates"));
        }
        for obs in &self.observables {
            if !obs.allowed(self.dynamics) {
                return Err(invalid(format!(
                    "observable {} is not available with {:?} dynamics",
                    obs.column(),
                    self.dynamics
                )));
            }
        }
        if self.mc_pairs == 0 {
            return Err(invalid("mc_pairs must be >= 1"));
        }
        if self.output.as_os_str().is_empty() {
            return Err(invalid("output path is empty"));
        }
        let model = self.model.build().map_err(|e| invalid(format!("model: {e}")))?;
        if self.dynamics == DynamicsKind::Gksl && self.observables.contains(&Observable::EntropyProduction) {
            if model.is_closed() {
                return Err(invalid("GKSL entropy_production needs a positive dissipation rate"));
            }
            self.resolved_equilibrium_temperature()?;
        }
        if let Some(t) = self.equilibrium_temperature {
            if !(t > 0.0) || !t.is_finite() {
                return Err(invalid(format!("equilibrium_temperature must be positive, got {t}")));
            }
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(invalid("sweep.values must not be empty"));
            }
        }
        Ok(())
    }

    fn resolved_equilibrium_temperature(&self) -> Result<f64, ScenarioError> {
        let t = match self.equilibrium_temperature {
            Some(t) => t,
            None => self.model.shared_temperature().ok_or_else(|| {
                invalid("equilibrium_temperature is required when baths have different temperatures")
            })?,
        };
        if t > 0.0 && t.is_finite() {
            Ok(t)
        } else {
            Err(invalid(format!("equilibrium temperature must be positive, got {t}")))
        }
    }

    /// Applies `value` at a dotted path such as `model.lambda`.
    pub fn with_parameter(&self, parameter: &str, value: &toml::Value) -> Result<Self, ScenarioError> {
        let mut tree = toml::Value::try_from(self).map_err(|e| invalid(e.to_string()))?;
        for path in parameter.split('+') {
            set_path(&mut tree, path.trim(), value.clone())?;
        }
        let updated: ScenarioConfig = tree
            .try_into()
            .map_err(|e: toml::de::Error| invalid(format!("{parameter} = {value}: {e}")))?;
        Ok(updated)
    }

    /// One config per sweep value (or just `self`), each with its own output path.
    pub fn expand(&self) -> Result<Vec<(Option<String>, ScenarioConfig)>, ScenarioError> {
        let Some(sweep) = &self.sweep else {
            return Ok(vec![(None, self.clone())]);
        };
        sweep_configs(self, &sweep.parameter, &sweep.values)
    }
}

fn set_path(tree: &mut toml::Value, path: &str, value: toml::Value) -> Result<(), ScenarioError> {
    let mut node = tree;
    let parts: Vec<&str> = path.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(invalid(format!("malformed parameter path {path:?}")));
    }
    let (last, parents) = parts.split_last().expect("non-empty");
    for part in parents {
        node = node
            .get_mut(*part)
            .ok_or_else(|| invalid(format!("unknown parameter path {path:?}")))?;
    }
    let table = node
        .as_table_mut()
        .ok_or_else(|| invalid(format!("{path:?} does not name a table field")))?;
    table.insert((*last).to_string(), value);
    Ok(())
}

fn value_label(value: &toml::Value) -> String {
    let raw = match value {
        toml::Value::String(s) => s.clone(),
        toml::Value::Float(x) => x.to_string(),
        other => other.to_string(),
    };
    raw.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' })
        .collect()
}

fn sweep_configs(
    base: &ScenarioConfig,
    parameter: &str,
    values: &[toml::Value],
) -> Result<Vec<(Option<String>, ScenarioConfig)>, ScenarioError> {
    let leaf = parameter
        .split('+')
        .next()
        .and_then(|p| p.rsplit('.').next())
        .unwrap_or(parameter)
        .to_string();
    let stem = base
        .output
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| base.name.clone());
    let mut out = Vec::with_capacity(values.len());
    for value in values {
        let mut cfg = base.with_parameter(parameter, value)?;
        cfg.sweep = None;
        let label = format!("{leaf}_{}", value_label(value));
        cfg.output = base.output.with_file_name(format!("{stem}_{label}.csv"));
        out.push((Some(format!("{parameter}={value}")), cfg));
    }
    Ok(out)
}

/// Parses `NAME=v1,v2,...`; each value is read as a TOML literal, falling back to a string.
pub fn parse_axis(spec: &str) -> Result<(String, Vec<toml::Value>), ScenarioError> {
    let (name, list) = spec
        .split_once('=')
        .ok_or_else(|| invalid(format!("axis must look like NAME=v1,v2,..., got {spec:?}")))?;
    let values: Vec<toml::Value> = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            toml::from_str::<toml::Table>(&format!("v = {s}"))
                .ok()
                .and_then(|mut t| t.remove("v"))
                .unwrap_or_else(|| toml::Value::String(s.to_string()))
        })
        .collect();
    if name.trim().is_empty() || values.is_empty() {
        return Err(invalid(format!("axis {spec:?} needs a name and at least one value")));
    }
    Ok((name.trim().to_string(), values))
}

/// One row per time point: `t` followed by one column per observable.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub metadata: Vec<String>,
}

impl ResultTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    /// CSV text; metadata lines start with `#`. `timestamp` adds a
    /// `generated_unix` line.
    pub fn to_csv(&self, timestamp: Option<u64>) -> String {
        let mut out = String::new();
        if let Some(ts) = timestamp {
            out.push_str(&format!("# generated_unix: {ts}\n"));
        }
        for line in &self.metadata {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// Writes through a temporary file in the target directory and renames it.
    pub fn write_atomic(&self, path: &Path, timestamp: Option<u64>) -> std::io::Result<()> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent)?;
        }
        let file_name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let tmp = path.with_file_name(format!(".{file_name}.{}.tmp", std::process::id()));
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(self.to_csv(timestamp).as_bytes())?;
            f.sync_all()?;
        }
        fs::rename(&tmp, path)
    }
}

fn initial_a_state(cfg: &ScenarioConfig, space: BipartiteSpace) -> Result<DensityMatrix, ScenarioError> {
    match (&cfg.model, cfg.initial_state) {
        (ModelConfig::Dicke(p) | ModelConfig::Tc(p), _) => {
            DensityMatrix::pure(p.atomic_ground_index(), space.d_a(), Subsystem::S).map_err(runtime)
        }
        (ModelConfig::Ising(p), InitialState::LowestZ) => {
            DensityMatrix::pure(p.subsystem_a_ground_index(), space.d_a(), Subsystem::S).map_err(runtime)
        }
        (ModelConfig::Ising(p), InitialState::BlockGround) => {
            let h_a = ising_block_hamiltonian(p, p.split).map_err(classify)?;
            hamiltonian_ground_state(&h_a, Subsystem::S).map_err(runtime)
        }
    }
}

struct Columns {
    names: Vec<String>,
    data: Vec<Vec<f64>>,
}

impl Columns {
    fn push(&mut self, name: &str, values: Vec<f64>) {
        self.names.push(name.to_string());
        self.data.push(values);
    }
}

/// Computes the table for a single (non-swept) configuration.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ResultTable, ScenarioError> {
    cfg.validate()?;
    let model = cfg.model.build().map_err(classify)?;
    let space = model.space;
    let times = cfg.time_grid.times();
    let wants = |o: Observable| cfg.observables.contains(&o);
    let mut cols = Columns {
        names: Vec::new(),
        data: Vec::new(),
    };

    match cfg.dynamics {
        DynamicsKind::Unitary => {
            let h = &model.hamiltonian;
            let thermo = if wants(Observable::EntropyProduction) || wants(Observable::CorrelationEntropy) {
                let rho_s = initial_a_state(cfg, space)?;
                let rho_e = DensityMatrix::maximally_mixed(space.d_b(), Subsystem::E);
                Some(entropy_production_unitary(h, space, &rho_s, &rho_e, &times).map_err(runtime)?)
            } else {
                None
            };
            for &obs in &cfg.observables {
                match obs {
                    Observable::OtocUnitary => {
                        cols.push(obs.column(), otoc_unitary(h, space, &times).map_err(runtime)?.values)
                    }
                    Observable::OpEntanglement => cols.push(
                        obs.column(),
                        operator_entanglement(h, space, &times).map_err(runtime)?.values,
                    ),
                    Observable::OtocHaarMc => {
                        let mc = otoc_haar_mc(
                            HeisenbergDynamics::Unitary {
                                hamiltonian: h,
                                times: &times,
                            },
                            space,
                            cfg.mc_pairs,
                            cfg.rng_seed,
                        )
                        .map_err(runtime)?;
                        cols.push(obs.column(), mc.values);
                        cols.push("otoc_haar_mc_stderr", mc.stderr.unwrap_or_default());
                    }
                    Observable::EntropyProduction => {
                        cols.push(obs.column(), thermo.as_ref().expect("computed").sigma.clone())
                    }
                    Observable::CorrelationEntropy => {
                        cols.push(obs.column(), thermo.as_ref().expect("computed").s_corr.clone())
                    }
                    Observable::OtocOpen => unreachable!("rejected by validation"),
                }
            }
        }
        DynamicsKind::Gksl => {
            let mut open = Vec::new();
            let mut mc = Vec::new();
            if wants(Observable::OtocOpen) || wants(Observable::OtocHaarMc) {
                let generator = build_adjoint_liouvillian(&model).map_err(runtime)?;
                let swaps = build_swaps(space);
                let stream = PropagatorStream::new(&generator, &times).map_err(classify)?;
                for (k, item) in stream.enumerate() {
                    let (t, map) = item.map_err(runtime)?;
                    if wants(Observable::OtocOpen) {
                        open.push(open_otoc_value(&map, &swaps, t).map_err(runtime)?);
                    }
                    if wants(Observable::OtocHaarMc) {
                        mc.push(
                            haar_mc_estimate(|x| map.apply(x), space, cfg.mc_pairs, cfg.rng_seed, k as u64)
                                .map_err(runtime)?,
                        );
                    }
                }
            }
            for &obs in &cfg.observables {
                match obs {
                    Observable::OtocOpen => cols.push(obs.column(), std::mem::take(&mut open)),
                    Observable::OtocHaarMc => {
                        cols.push(obs.column(), mc.iter().map(|e| e.0).collect());
                        cols.push("otoc_haar_mc_stderr", mc.iter().map(|e| e.1).collect());
                    }
                    Observable::EntropyProduction => {
                        let temperature = cfg.resolved_equilibrium_temperature()?;
                        let rho_a = initial_a_state(cfg, space)?;
                        let rho_b = DensityMatrix::maximally_mixed(space.d_b(), Subsystem::E);
                        let rho0 = DensityMatrix::new(kron(rho_a.matrix(), rho_b.matrix()), Subsystem::S)
                            .map_err(runtime)?;
                        let series = entropy_production_gksl(&model, &rho0, &times, temperature).map_err(runtime)?;
                        cols.push(obs.column(), series.sigma);
                    }
                    _ => unreachable!("rejected by validation"),
                }
            }
        }
    }

    let mut columns = vec!["t".to_string()];
    columns.extend(cols.names);
    let rows = times
        .iter()
        .enumerate()
        .map(|(k, &t)| std::iter::once(t).chain(cols.data.iter().map(|c| c[k])).collect())
        .collect();
    let mut metadata = vec![
        format!("artifact: {ARTIFACT_VERSION}"),
        format!("scenario: {}", cfg.name),
        "config:".to_string(),
    ];
    metadata.extend(cfg.to_toml().lines().map(|l| format!("  {l}")));
    Ok(ResultTable {
        columns,
        rows,
        metadata,
    })
}

/// Result of one sweep member.
#[derive(Debug)]
pub struct SweepOutcome {
    pub label: Option<String>,
    pub output: PathBuf,
    pub result: Result<ResultTable, ScenarioError>,
}

/// Runs every member of `configs` independently; failures are collected.
pub fn run_many(configs: Vec<(Option<String>, ScenarioConfig)>) -> Vec<SweepOutcome> {
    configs
        .into_par_iter()
        .map(|(label, cfg)| {
            let result = run_scenario(&cfg).map(|mut table| {
                if let Some(l) = &label {
                    table.metadata.insert(2, format!("sweep: {l}"));
                }
                table
            });
            let result = match (&label, result) {
                (Some(l), Err(e)) => Err(e.context(l)),
                (_, r) => r,
            };
            SweepOutcome {
                label,
                output: cfg.output.clone(),
                result,
            }
        })
        .collect()
}

/// Expands `base` along an explicit axis, replacing any sweep it carries.
pub fn sweep(
    base: &ScenarioConfig,
    parameter: &str,
    values: &[toml::Value],
) -> Result<Vec<SweepOutcome>, ScenarioError> {
    let mut plain = base.clone();
    plain.sweep = None;
    Ok(run_many(sweep_configs(&plain, parameter, values)?))
}

/// Scenario files (`*.toml`) in a directory, sorted by file name.
pub fn list_scenarios(dir: &Path) -> Result<Vec<(PathBuf, Result<ScenarioConfig, ScenarioError>)>, ScenarioError> {
    let entries = fs::read_dir(dir).map_err(|e| invalid(format!("cannot read {}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    paths.sort();
    Ok(paths
        .into_iter()
        .map(|p| {
            let cfg = ScenarioConfig::load(&p);
            (p, cfg)
        })
        .collect())
}

/// One-line model summary for listings.
pub fn describe_model(model: &ModelConfig) -> String {
    match model {
        ModelConfig::Dicke(p) => format!("dicke N={} n_max={} lambda={}", p.n_atoms, p.n_max, p.lambda),
        ModelConfig::Tc(p) => format!("tc N={} n_max={} lambda={}", p.n_atoms, p.n_max, p.lambda),
        ModelConfig::Ising(p) => format!(
            "ising N={} split={}:{} theta={} baths={}",
            p.n_spins,
            p.split,
            p.n_spins - p.split,
            p.theta,
            match p.bath_topology {
                BathTopology::Uniform => "uniform",
                BathTopology::Boundary => "boundary",
            }
        ),
    }
}
