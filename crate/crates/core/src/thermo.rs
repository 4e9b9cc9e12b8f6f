//! Entropies, entropy production and correlation entropy.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    herm_eig, kron, log_psd, partial_trace, spectral_map, BipartiteSpace, ComplexMatrix, UnitaryEvolution, PSD_CLAMP,
};
use crate::liouville::{build_state_liouvillian, PropagatorStream};
use crate::models::ModelSpec;

pub const STATE_TOL: f64 = 1e-10;
/// Weight of `rho` on the kernel of `sigma` above which `S(rho||sigma)` diverges.
pub const SUPPORT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subsystem {
    S,
    E,
    SE,
}

/// A validated density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    subsystem: Subsystem,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix, subsystem: Subsystem) -> Result<Self> {
        matrix.dim()?;
        let dev = matrix.hermiticity_deviation();
        if dev > STATE_TOL {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
        }
        let (values, _) = herm_eig(&matrix.hermitian_part())?;
        if values[0] < -STATE_TOL {
            return Err(Error::NotPositive {
                min_eigenvalue: values[0],
            });
        }
        Ok(Self { matrix, subsystem })
    }

    pub fn pure(index: usize, dim: usize, subsystem: Subsystem) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidState(format!("basis index {index} out of range for dimension {dim}")));
        }
        let mut diag = vec![0.0; dim];
        diag[index] = 1.0;
        Self::new(ComplexMatrix::from_real_diag(&diag), subsystem)
    }

    pub fn maximally_mixed(dim: usize, subsystem: Subsystem) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
            subsystem,
        }
    }

    pub fn from_vector(psi: &[num_complex::Complex64], subsystem: Subsystem) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let v: Vec<_> = psi.iter().map(|z| z / norm).collect();
        Self::new(ComplexMatrix::outer(&v, &v), subsystem)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn subsystem(&self) -> Subsystem {
        self.subsystem
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            matrix: kron(&self.matrix, &other.matrix),
            subsystem: Subsystem::SE,
        }
    }
}

/// Relative entropy value; `Divergent` flags a support violation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RelEntropy {
    Finite(f64),
    Divergent,
}

impl RelEntropy {
    pub fn is_finite(self) -> bool {
        matches!(self, RelEntropy::Finite(_))
    }

    /// The value with `+inf` standing in for divergence.
    pub fn value(self) -> f64 {
        match self {
            RelEntropy::Finite(v) => v,
            RelEntropy::Divergent => f64::INFINITY,
        }
    }
}

impl fmt::Display for RelEntropy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RelEntropy::Finite(v) => write!(f, "{v}"),
            RelEntropy::Divergent => f.write_str("inf"),
        }
    }
}

fn entropy_of_spectrum(values: &[f64]) -> f64 {
    values
        .iter()
        .filter(|&&l| l > PSD_CLAMP)
        .map(|&l| -l * l.ln())
        .sum()
}

pub fn vn_entropy(rho: &DensityMatrix) -> Result<f64> {
    let (values, _) = herm_eig(&rho.matrix.hermitian_part())?;
    Ok(entropy_of_spectrum(&values))
}

/// `Tr rho (ln rho - ln sigma)`.
pub fn rel_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<RelEntropy> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!(
            "relative entropy of {}-dim state against {}-dim state",
            rho.dim(),
            sigma.dim()
        )));
    }
    let rho_h = rho.matrix.hermitian_part();
    let log_sigma = log_psd(&sigma.matrix.hermitian_part(), PSD_CLAMP)?;
    for &k in &log_sigma.kernel {
        let v = log_sigma.eigenvectors.column(k);
        let weight = rho_h.matvec(&v)?.iter().zip(&v).map(|(a, b)| b.conj() * a).sum::<num_complex::Complex64>();
        if weight.re > SUPPORT_TOL {
            return Ok(RelEntropy::Divergent);
        }
    }
    let (values, _) = herm_eig(&rho_h)?;
    let neg_entropy = -entropy_of_spectrum(&values);
    let cross = rho_h.trace_product(&log_sigma.log)?.re;
    Ok(RelEntropy::Finite(neg_entropy - cross))
}

/// `exp(-H/T) / Z`.
pub fn gibbs_state(h: &ComplexMatrix, temperature: f64) -> Result<DensityMatrix> {
    if !(temperature > 0.0) || !temperature.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "Gibbs state needs a positive finite temperature, got {temperature}"
        )));
    }
    let (energies, basis) = herm_eig(h)?;
    let e0 = energies[0];
    let weights: Vec<f64> = energies.iter().map(|e| (-(e - e0) / temperature).exp()).collect();
    let z: f64 = weights.iter().sum();
    let rho = spectral_map(&energies, &basis, |e| {
        num_complex::Complex64::new((-(e - e0) / temperature).exp() / z, 0.0)
    });
    DensityMatrix::new(rho.hermitian_part(), Subsystem::SE)
}

/// Which time point and quantity hit a support violation.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportViolation {
    pub time: f64,
    pub quantity: &'static str,
}

/// Entropy production and correlation entropy of a unitary S+E evolution.
/// Divergent entries are stored as `+inf` (sigma) or `-inf` (s_corr) and
/// listed in `violations`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermoSeries {
    pub times: Vec<f64>,
    pub sigma: Vec<f64>,
    pub s_corr: Vec<f64>,
    pub sum: Vec<f64>,
    /// `S(rho_E(t) || rho_E(0))`.
    pub env_relative: Vec<f64>,
    pub violations: Vec<SupportViolation>,
}

fn reduce(rho_se: &ComplexMatrix, space: BipartiteSpace, keep: usize, tag: Subsystem) -> Result<DensityMatrix> {
    let reduced = partial_trace(rho_se, &[space.d_a(), space.d_b()], &[keep])?;
    DensityMatrix::new(reduced.hermitian_part(), tag)
}

/// `Sigma = S(rho_SE(t) || rho_S(t) (x) rho_E(0))`, `S_C = -S(rho_SE(t) || rho_S(t) (x) rho_E(t))`.
pub fn entropy_production_unitary(
    h: &ComplexMatrix,
    space: BipartiteSpace,
    rho_s0: &DensityMatrix,
    rho_e0: &DensityMatrix,
    times: &[f64],
) -> Result<ThermoSeries> {
    if rho_s0.dim() != space.d_a() || rho_e0.dim() != space.d_b() || h.rows() != space.dim() {
        return Err(Error::DimensionMismatch(format!(
            "states of dimension {} and {} with a {}-dim Hamiltonian do not fit {}x{}",
            rho_s0.dim(),
            rho_e0.dim(),
            h.rows(),
            space.d_a(),
            space.d_b()
        )));
    }
    let evo = UnitaryEvolution::new(h)?;
    let rho0 = rho_s0.tensor(rho_e0);
    let mut out = ThermoSeries {
        times: times.to_vec(),
        sigma: Vec::with_capacity(times.len()),
        s_corr: Vec::with_capacity(times.len()),
        sum: Vec::with_capacity(times.len()),
        env_relative: Vec::with_capacity(times.len()),
        violations: Vec::new(),
    };
    for &t in times {
        let u = evo.unitary(t);
        let evolved = u.matmul(rho0.matrix())?.matmul(&u.adjoint())?.hermitian_part();
        let rho_se = DensityMatrix::new(evolved, Subsystem::SE)?;
        let rho_s = reduce(rho_se.matrix(), space, 0, Subsystem::S)?;
        let rho_e = reduce(rho_se.matrix(), space, 1, Subsystem::E)?;

        let sigma = rel_entropy(&rho_se, &rho_s.tensor(rho_e0))?;
        let mutual = rel_entropy(&rho_se, &rho_s.tensor(&rho_e))?;
        let env = rel_entropy(&rho_e, rho_e0)?;
        for (value, name) in [(sigma, "sigma"), (mutual, "s_corr"), (env, "env_relative")] {
            if !value.is_finite() {
                out.violations.push(SupportViolation { time: t, quantity: name });
            }
        }
        out.sigma.push(sigma.value());
        out.s_corr.push(-mutual.value());
        out.sum.push(sigma.value() - mutual.value());
        out.env_relative.push(env.value());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GkslEntropySeries {
    pub times: Vec<f64>,
    pub sigma: Vec<f64>,
}

/// `Sigma(t) = S(rho(0) || rho_eq) - S(rho(t) || rho_eq)` with `rho_eq` the
/// Gibbs state of the model Hamiltonian at `temperature`.
pub fn entropy_production_gksl(
    model: &ModelSpec,
    rho0: &DensityMatrix,
    times: &[f64],
    temperature: f64,
) -> Result<GkslEntropySeries> {
    if model.is_closed() {
        return Err(Error::InvalidParameter(
            "GKSL entropy production needs at least one positive rate".into(),
        ));
    }
    if rho0.dim() != model.dim() {
        return Err(Error::DimensionMismatch(format!(
            "initial state has dimension {}, model has {}",
            rho0.dim(),
            model.dim()
        )));
    }
    let eq = gibbs_state(&model.hamiltonian, temperature)?;
    let initial = match rel_entropy(rho0, &eq)? {
        RelEntropy::Finite(v) => v,
        RelEntropy::Divergent => return Err(Error::SupportViolation { time: 0.0 }),
    };
    let generator = build_state_liouvillian(model)?;
    let mut sigma = Vec::with_capacity(times.len());
    for item in PropagatorStream::new(&generator, times)? {
        let (t, map) = item?;
        let rho_t = DensityMatrix::new(map.apply(rho0.matrix())?.hermitian_part(), Subsystem::S)?;
        match rel_entropy(&rho_t, &eq)? {
            RelEntropy::Finite(v) => sigma.push(initial - v),
            RelEntropy::Divergent => return Err(Error::SupportViolation { time: t }),
        }
    }
    Ok(GkslEntropySeries {
        times: times.to_vec(),
        sigma,
    })
}

/// `|g><g|_A (x) I_B / d_B` with `g` a basis index of `A`.
pub fn ground_mixed_product(space: BipartiteSpace, ground_index: usize) -> Result<(DensityMatrix, DensityMatrix)> {
    Ok((
        DensityMatrix::pure(ground_index, space.d_a(), Subsystem::S)?,
        DensityMatrix::maximally_mixed(space.d_b(), Subsystem::E),
    ))
}

/// Projector onto the lowest eigenvector of a Hermitian `h`.
pub fn hamiltonian_ground_state(h: &ComplexMatrix, subsystem: Subsystem) -> Result<DensityMatrix> {
    let (values, vectors) = herm_eig(h)?;
    if values.len() > 1 && (values[1] - values[0]).abs() < 1e-10 {
        return Err(Error::InvalidState("ground state is degenerate".into()));
    }
    DensityMatrix::from_vector(&vectors.column(0), subsystem)
}
