//! Spin, bosonic and site-embedded operators.
//!
//! Spin bases are ordered by descending magnetic number, `m = j, j-1, ..., -j`,
//! so index 0 is the upper `J_z` eigenstate. For a qubit this makes `|0>` the
//! `+1` eigenstate of `sigma_z` and `sigma_- = |1><0|` the lowering operator.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{kron_all, ComplexMatrix, I};

/// Collective angular momentum operators for pseudospin length `j`.
#[derive(Debug, Clone)]
pub struct SpinJOperators {
    pub j: f64,
    pub jz: ComplexMatrix,
    pub jp: ComplexMatrix,
    pub jm: ComplexMatrix,
    pub jx: ComplexMatrix,
}

impl SpinJOperators {
    pub fn dim(&self) -> usize {
        self.jz.rows()
    }

    pub fn jy(&self) -> ComplexMatrix {
        (&self.jp - &self.jm).scale(-I * 0.5)
    }

    /// Index of the `m = -j` state (lowest `J_z` eigenvalue).
    pub fn lowest_index(&self) -> usize {
        self.dim() - 1
    }
}

pub fn collective_spin(j: f64) -> Result<SpinJOperators> {
    let two_j = 2.0 * j;
    if !(two_j >= 0.0) || (two_j - two_j.round()).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "spin length must be a non-negative half-integer, got {j}"
        )));
    }
    let dim = two_j.round() as usize + 1;
    let m = |k: usize| j - k as f64;
    let jz = ComplexMatrix::from_real_diag(&(0..dim).map(m).collect::<Vec<_>>());
    // <j, m+1| J+ |j, m> = sqrt(j(j+1) - m(m+1)); m+1 sits one index above m.
    let jp = ComplexMatrix::from_fn(dim, dim, |r, c| {
        if c == r + 1 {
            let mc = m(c);
            Complex64::new((j * (j + 1.0) - mc * (mc + 1.0)).max(0.0).sqrt(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let jm = jp.adjoint();
    let jx = (&jp + &jm).scale_real(0.5);
    Ok(SpinJOperators { j, jz, jp, jm, jx })
}

/// Truncated single-mode bosonic operators on `span{|0>, ..., |n_max - 1>}`.
#[derive(Debug, Clone)]
pub struct BosonOperators {
    pub n_max: usize,
    pub a: ComplexMatrix,
    pub a_dag: ComplexMatrix,
    pub num: ComplexMatrix,
}

pub fn boson_ops(n_max: usize) -> Result<BosonOperators> {
    if n_max < 2 {
        return Err(Error::InvalidParameter(format!(
            "Fock cutoff must be at least 2, got {n_max}"
        )));
    }
    let a = ComplexMatrix::from_fn(n_max, n_max, |r, c| {
        if c == r + 1 {
            Complex64::new((c as f64).sqrt(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let a_dag = a.adjoint();
    let num = ComplexMatrix::from_real_diag(&(0..n_max).map(|n| n as f64).collect::<Vec<_>>());
    Ok(BosonOperators {
        n_max,
        a,
        a_dag,
        num,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
    Plus,
    Minus,
}

impl Pauli {
    pub fn matrix(self) -> ComplexMatrix {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let rows: [[Complex64; 2]; 2] = match self {
            Pauli::X => [[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]],
            Pauli::Y => [[c(0., 0.), c(0., -1.)], [c(0., 1.), c(0., 0.)]],
            Pauli::Z => [[c(1., 0.), c(0., 0.)], [c(0., 0.), c(-1., 0.)]],
            Pauli::Plus => [[c(0., 0.), c(1., 0.)], [c(0., 0.), c(0., 0.)]],
            Pauli::Minus => [[c(0., 0.), c(0., 0.)], [c(1., 0.), c(0., 0.)]],
        };
        ComplexMatrix::from_rows(&[&rows[0], &rows[1]]).expect("2x2")
    }
}

/// A 2x2 operator embedded at one site of an `n`-qubit chain.
#[derive(Debug, Clone)]
pub struct SiteOperator {
    pub n_sites: usize,
    /// 1-based site index.
    pub site: usize,
    pub local: ComplexMatrix,
    pub embedded: ComplexMatrix,
}

pub fn embed_site(n_sites: usize, site: usize, local: &ComplexMatrix) -> Result<SiteOperator> {
    if site == 0 || site > n_sites {
        return Err(Error::InvalidParameter(format!(
            "site {site} out of range 1..={n_sites}"
        )));
    }
    if local.rows() != 2 || local.cols() != 2 {
        return Err(Error::DimensionMismatch("site operators must be 2x2".into()));
    }
    let id = ComplexMatrix::identity(2);
    let factors: Vec<&ComplexMatrix> = (1..=n_sites)
        .map(|k| if k == site { local } else { &id })
        .collect();
    let embedded = kron_all(factors).expect("at least one site");
    Ok(SiteOperator {
        n_sites,
        site,
        local: local.clone(),
        embedded,
    })
}

pub fn pauli_site(n_sites: usize, site: usize, which: Pauli) -> Result<SiteOperator> {
    embed_site(n_sites, site, &which.matrix())
}
