//! Model Hamiltonians and their Lindblad jump sets (units with hbar = k_B = 1).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{kron, BipartiteSpace, ComplexMatrix};
use crate::operators::{boson_ops, collective_spin, pauli_site, Pauli};

/// Thermal occupation `1 / (exp(omega / T) - 1)`, exactly 0 at `T = 0`.
pub fn thermal_occupation(omega: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        0.0
    } else {
        1.0 / (omega / temperature).exp_m1()
    }
}

/// A bosonic bath coupled through one transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSpec {
    pub rate: f64,
    pub temperature: f64,
    pub transition_frequency: f64,
}

impl BathSpec {
    pub fn new(rate: f64, temperature: f64, transition_frequency: f64) -> Result<Self> {
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::InvalidParameter(format!("bath rate must be >= 0, got {rate}")));
        }
        if !(temperature >= 0.0) || !temperature.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "temperature must be >= 0, got {temperature}"
            )));
        }
        if !(transition_frequency > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "transition frequency must be > 0, got {transition_frequency}"
            )));
        }
        Ok(Self {
            rate,
            temperature,
            transition_frequency,
        })
    }

    pub fn n_th(&self) -> f64 {
        thermal_occupation(self.transition_frequency, self.temperature)
    }

    /// Rates `(downward, upward) = (rate (n + 1), rate n)`.
    pub fn rates(&self) -> (f64, f64) {
        let n = self.n_th();
        (self.rate * (n + 1.0), self.rate * n)
    }
}

#[derive(Debug, Clone)]
pub struct Jump {
    pub operator: ComplexMatrix,
    pub rate: f64,
    pub label: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Dicke,
    Tc,
    Ising,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Dicke => "dicke",
            ModelKind::Tc => "tc",
            ModelKind::Ising => "ising",
        })
    }
}

/// Hamiltonian, jump operators and bipartition of a model.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub space: BipartiteSpace,
    pub hamiltonian: ComplexMatrix,
    pub jumps: Vec<Jump>,
}

impl ModelSpec {
    pub fn new(
        kind: ModelKind,
        space: BipartiteSpace,
        hamiltonian: ComplexMatrix,
        jumps: Vec<Jump>,
    ) -> Result<Self> {
        let spec = Self {
            kind,
            space,
            hamiltonian,
            jumps,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.space.dim();
        if self.hamiltonian.rows() != d || self.hamiltonian.cols() != d {
            return Err(Error::DimensionMismatch(format!(
                "Hamiltonian is {}x{}, bipartition has dimension {d}",
                self.hamiltonian.rows(),
                self.hamiltonian.cols()
            )));
        }
        self.hamiltonian.ensure_hermitian()?;
        for jump in &self.jumps {
            if jump.operator.rows() != d || jump.operator.cols() != d {
                return Err(Error::DimensionMismatch(format!(
                    "jump operator {} is not {d}x{d}",
                    jump.label
                )));
            }
            if !jump.rate.is_finite() || jump.rate < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "jump {} has invalid rate {}",
                    jump.label, jump.rate
                )));
            }
        }
        Ok(())
    }

    /// True when no jump carries a positive rate.
    pub fn is_closed(&self) -> bool {
        self.jumps.iter().all(|j| j.rate == 0.0)
    }

    pub fn without_dissipation(&self) -> ModelSpec {
        ModelSpec {
            jumps: Vec::new(),
            ..self.clone()
        }
    }
}

fn push_bath_jumps(
    jumps: &mut Vec<Jump>,
    bath: &BathSpec,
    lower: &ComplexMatrix,
    raise: &ComplexMatrix,
    name: &str,
) {
    let (down, up) = bath.rates();
    if down > 0.0 {
        jumps.push(Jump {
            operator: lower.clone(),
            rate: down,
            label: format!("{name}-"),
        });
    }
    if up > 0.0 {
        jumps.push(Jump {
            operator: raise.clone(),
            rate: up,
            label: format!("{name}+"),
        });
    }
}

/// Parameters shared by the Dicke and Tavis-Cummings models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AtomFieldParams {
    pub omega0: f64,
    pub omegac: f64,
    pub lambda: f64,
    pub n_atoms: usize,
    pub n_max: usize,
    pub gamma: f64,
    pub kappa: f64,
    pub temp_a: f64,
    pub temp_b: f64,
}

impl Default for AtomFieldParams {
    fn default() -> Self {
        Self {
            omega0: 2.0,
            omegac: 2.0,
            lambda: 1.0,
            n_atoms: 2,
            n_max: 3,
            gamma: 0.0,
            kappa: 0.0,
            temp_a: 0.0,
            temp_b: 0.0,
        }
    }
}

impl AtomFieldParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega0 > 0.0 && self.omegac > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "frequencies must be positive (omega0 = {}, omegac = {})",
                self.omega0, self.omegac
            )));
        }
        if !self.lambda.is_finite() {
            return Err(Error::InvalidParameter("lambda must be finite".into()));
        }
        if self.n_atoms == 0 {
            return Err(Error::InvalidParameter("n_atoms must be >= 1".into()));
        }
        if self.n_max < 2 {
            return Err(Error::InvalidParameter("n_max must be >= 2".into()));
        }
        // Rates and temperatures are checked by BathSpec.
        self.atom_bath()?;
        self.field_bath()?;
        Ok(())
    }

    pub fn space(&self) -> Result<BipartiteSpace> {
        BipartiteSpace::new(self.n_atoms + 1, self.n_max)
    }

    pub fn atom_bath(&self) -> Result<BathSpec> {
        BathSpec::new(self.gamma, self.temp_a, self.omega0)
    }

    pub fn field_bath(&self) -> Result<BathSpec> {
        BathSpec::new(self.kappa, self.temp_b, self.omegac)
    }

    /// Index of the lowest `J_z` state in the atomic factor.
    pub fn atomic_ground_index(&self) -> usize {
        self.n_atoms
    }
}

/// `sqrt(omega0 * omegac) / 2`.
pub fn critical_coupling(omega0: f64, omegac: f64) -> f64 {
    (omega0 * omegac).sqrt() / 2.0
}

struct AtomFieldParts {
    space: BipartiteSpace,
    free: ComplexMatrix,
    jz: ComplexMatrix,
    jp: ComplexMatrix,
    jm: ComplexMatrix,
    jx: ComplexMatrix,
    a: ComplexMatrix,
    a_dag: ComplexMatrix,
    jumps: Vec<Jump>,
}

fn atom_field_parts(p: &AtomFieldParams) -> Result<AtomFieldParts> {
    p.validate()?;
    let space = p.space()?;
    let spin = collective_spin(p.n_atoms as f64 / 2.0)?;
    let boson = boson_ops(p.n_max)?;
    let id_a = ComplexMatrix::identity(space.d_a());
    let id_b = ComplexMatrix::identity(space.d_b());
    let on_a = |m: &ComplexMatrix| kron(m, &id_b);
    let on_b = |m: &ComplexMatrix| kron(&id_a, m);

    let jz = on_a(&spin.jz);
    let jp = on_a(&spin.jp);
    let jm = on_a(&spin.jm);
    let jx = on_a(&spin.jx);
    let a = on_b(&boson.a);
    let a_dag = on_b(&boson.a_dag);
    let free = &jz.scale_real(p.omega0) + &on_b(&boson.num).scale_real(p.omegac);

    let mut jumps = Vec::new();
    push_bath_jumps(&mut jumps, &p.atom_bath()?, &jm, &jp, "J");
    push_bath_jumps(&mut jumps, &p.field_bath()?, &a, &a_dag, "a");
    Ok(AtomFieldParts {
        space,
        free,
        jz,
        jp,
        jm,
        jx,
        a,
        a_dag,
        jumps,
    })
}

/// `H = w0 Jz + wc a^dag a + (lambda / sqrt N) Jx (a + a^dag)` with collective
/// atomic and cavity baths.
pub fn build_dicke(p: &AtomFieldParams) -> Result<ModelSpec> {
    let parts = atom_field_parts(p)?;
    let coupling = parts
        .jx
        .matmul(&(&parts.a + &parts.a_dag))?
        .scale_real(p.lambda / (p.n_atoms as f64).sqrt());
    let h = &parts.free + &coupling;
    ModelSpec::new(ModelKind::Dicke, parts.space, h.hermitian_part(), parts.jumps)
}

/// `H = w0 Jz + wc a^dag a + (lambda / 2 sqrt N)(J+ a + J- a^dag)`.
pub fn build_tc(p: &AtomFieldParams) -> Result<ModelSpec> {
    let parts = atom_field_parts(p)?;
    let exchange = &parts.jp.matmul(&parts.a)? + &parts.jm.matmul(&parts.a_dag)?;
    let h = &parts.free + &exchange.scale_real(p.lambda / (2.0 * (p.n_atoms as f64).sqrt()));
    ModelSpec::new(ModelKind::Tc, parts.space, h.hermitian_part(), parts.jumps)
}

/// Total excitation number `a^dag a + Jz` on the atom-field space.
pub fn excitation_number(p: &AtomFieldParams) -> Result<ComplexMatrix> {
    let parts = atom_field_parts(p)?;
    Ok(&parts.a_dag.matmul(&parts.a)? + &parts.jz)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BathTopology {
    /// Every site couples to its own bath.
    Uniform,
    /// Only the first and last sites couple, each to its own bath.
    Boundary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IsingParams {
    pub n_spins: usize,
    /// Number of leading sites in subsystem A.
    pub split: usize,
    pub b_field: f64,
    pub theta: f64,
    pub coupling: f64,
    pub gamma: f64,
    pub bath_topology: BathTopology,
    /// One temperature per bath: 1 (shared) or `n_spins` for uniform, 2 for boundary.
    pub temperatures: Vec<f64>,
    /// Multiplier of the bond between sites 1 and 2.
    pub boundary_bond_scale: f64,
}

impl Default for IsingParams {
    fn default() -> Self {
        Self {
            n_spins: 4,
            split: 1,
            b_field: 0.5,
            theta: 0.0,
            coupling: 0.5,
            gamma: 0.0,
            bath_topology: BathTopology::Uniform,
            temperatures: vec![0.0],
            boundary_bond_scale: 1.0,
        }
    }
}

impl IsingParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_spins < 2 {
            return Err(Error::InvalidParameter(format!(
                "Ising chain needs at least 2 spins, got {}",
                self.n_spins
            )));
        }
        if self.split == 0 || self.split >= self.n_spins {
            return Err(Error::InvalidParameter(format!(
                "split must leave both subsystems non-empty (split = {}, n_spins = {})",
                self.split, self.n_spins
            )));
        }
        let half_pi = std::f64::consts::FRAC_PI_2;
        if !(self.theta >= 0.0 && self.theta <= half_pi + 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "theta must lie in [0, pi/2], got {}",
                self.theta
            )));
        }
        if !self.b_field.is_finite() || !self.coupling.is_finite() || !self.boundary_bond_scale.is_finite() {
            return Err(Error::InvalidParameter("Ising couplings must be finite".into()));
        }
        let expected: &[usize] = match self.bath_topology {
            BathTopology::Uniform => &[1, self.n_spins],
            BathTopology::Boundary => &[2],
        };
        if !expected.contains(&self.temperatures.len()) {
            return Err(Error::InvalidParameter(format!(
                "{:?} bath topology needs {:?} temperatures, got {}",
                self.bath_topology,
                expected,
                self.temperatures.len()
            )));
        }
        if self.gamma > 0.0 {
            self.baths()?;
        } else if !(self.gamma >= 0.0) {
            return Err(Error::InvalidParameter(format!("gamma must be >= 0, got {}", self.gamma)));
        }
        Ok(())
    }

    pub fn space(&self) -> Result<BipartiteSpace> {
        BipartiteSpace::new(1 << self.split, 1 << (self.n_spins - self.split))
    }

    /// `(site, bath)` pairs with sites 1-based; transition frequency `2 B`.
    pub fn baths(&self) -> Result<Vec<(usize, BathSpec)>> {
        let omega = 2.0 * self.b_field;
        let sites: Vec<usize> = match self.bath_topology {
            BathTopology::Uniform => (1..=self.n_spins).collect(),
            BathTopology::Boundary => vec![1, self.n_spins],
        };
        sites
            .into_iter()
            .enumerate()
            .map(|(k, site)| {
                let t = if self.temperatures.len() == 1 {
                    self.temperatures[0]
                } else {
                    self.temperatures[k]
                };
                BathSpec::new(self.gamma, t, omega).map(|b| (site, b))
            })
            .collect()
    }

    /// Index of the all-down (lowest `sigma_z`) state of subsystem A.
    pub fn subsystem_a_ground_index(&self) -> usize {
        (1 << self.split) - 1
    }
}

/// Single-site field term `B (sin(theta) sigma_x + cos(theta) sigma_z)` on site `site` (1-based).
pub fn ising_field_term(p: &IsingParams, site: usize) -> Result<ComplexMatrix> {
    let n = p.n_spins;
    let x = pauli_site(n, site, Pauli::X)?.embedded;
    let z = pauli_site(n, site, Pauli::Z)?.embedded;
    Ok(&x.scale_real(p.b_field * p.theta.sin()) + &z.scale_real(p.b_field * p.theta.cos()))
}

/// Field term of a single qubit, `B (sin(theta) sigma_x + cos(theta) sigma_z)`.
pub fn local_field(p: &IsingParams) -> ComplexMatrix {
    &Pauli::X.matrix().scale_real(p.b_field * p.theta.sin())
        + &Pauli::Z.matrix().scale_real(p.b_field * p.theta.cos())
}

/// Open-boundary chain `B sum_i (sin t X_i + cos t Z_i) + J sum_{i<N} Z_i Z_{i+1}`.
pub fn build_ising(p: &IsingParams) -> Result<ModelSpec> {
    p.validate()?;
    let n = p.n_spins;
    let space = p.space()?;
    let mut h = ComplexMatrix::zeros(space.dim(), space.dim());
    for site in 1..=n {
        h += &ising_field_term(p, site)?;
    }
    for site in 1..n {
        let zz = pauli_site(n, site, Pauli::Z)?
            .embedded
            .matmul(&pauli_site(n, site + 1, Pauli::Z)?.embedded)?;
        let scale = if site == 1 { p.boundary_bond_scale } else { 1.0 };
        h += &zz.scale_real(p.coupling * scale);
    }

    let mut jumps = Vec::new();
    if p.gamma > 0.0 {
        for (site, bath) in p.baths()? {
            let lower = pauli_site(n, site, Pauli::Minus)?.embedded;
            let raise = pauli_site(n, site, Pauli::Plus)?.embedded;
            push_bath_jumps(&mut jumps, &bath, &lower, &raise, &format!("sigma{site}"));
        }
    }
    ModelSpec::new(ModelKind::Ising, space, h, jumps)
}

/// The chain Hamiltonian restricted to the first `sites` spins (the `A` block
/// for `sites = split`), with the same fields and bonds.
pub fn ising_block_hamiltonian(p: &IsingParams, sites: usize) -> Result<ComplexMatrix> {
    if sites == 0 || sites > p.n_spins {
        return Err(Error::InvalidParameter(format!(
            "block of {sites} sites does not fit a chain of {}",
            p.n_spins
        )));
    }
    let field = local_field(p);
    let z = Pauli::Z.matrix();
    let mut h = ComplexMatrix::zeros(1 << sites, 1 << sites);
    for site in 1..=sites {
        h += &crate::operators::embed_site(sites, site, &field)?.embedded;
    }
    for site in 1..sites {
        let zz = crate::operators::embed_site(sites, site, &z)?
            .embedded
            .matmul(&crate::operators::embed_site(sites, site + 1, &z)?.embedded)?;
        let scale = if site == 1 { p.boundary_bond_scale } else { 1.0 };
        h += &zz.scale_real(p.coupling * scale);
    }
    Ok(h)
}
