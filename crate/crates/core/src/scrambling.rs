//! Swap operators on two replicas of `H_A (x) H_B` and the Haar-averaged
//! bipartite OTOC for unitary and open dynamics.
//!
//! Replica indices are ordered `(A, B, A', B')` with `A` slowest.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    apply_both, haar_unitary_with, kron, reduced_pure, seeded_stream, vectorize, BipartiteSpace, ComplexMatrix,
    UnitaryEvolution, ONE,
};
use crate::liouville::{Picture, PropagatorFamily, PropagatorStream, Superoperator};

pub const RESIDUE_TOL: f64 = 1e-10;
pub const DEFAULT_MC_PAIRS: usize = 200;

/// A permutation of the replica basis, stored as `sigma` with `P |r> = |sigma(r)>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn image(&self, r: usize) -> usize {
        self.0[r]
    }

    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation(other.0.iter().map(|&r| self.0[r]).collect())
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &p)| i == p)
    }

    pub fn fixed_points(&self) -> usize {
        self.0.iter().enumerate().filter(|(i, p)| i == *p).count()
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        let n = self.0.len();
        let mut m = ComplexMatrix::zeros(n, n);
        for (r, &p) in self.0.iter().enumerate() {
            m[(p, r)] = ONE;
        }
        m
    }

    /// `Tr(P X)`.
    pub fn trace_with(&self, x: &ComplexMatrix) -> Complex64 {
        // (P X)_{rr} = X_{sigma^-1(r), r}; all swaps here are involutions but
        // the general form costs nothing.
        let mut inv = vec![0; self.0.len()];
        for (r, &p) in self.0.iter().enumerate() {
            inv[p] = r;
        }
        inv.iter().enumerate().map(|(r, &c)| x[(c, r)]).sum()
    }

    /// `Tr(P X P^T Y)`.
    pub fn sandwich_trace(&self, x: &ComplexMatrix, y: &ComplexMatrix) -> Complex64 {
        // (P X P^T)_{ij} = X_{sigma^-1 i, sigma^-1 j}.
        let n = self.0.len();
        let mut inv = vec![0; n];
        for (r, &p) in self.0.iter().enumerate() {
            inv[p] = r;
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let xi = inv[i];
            for j in 0..n {
                acc += x[(xi, inv[j])] * y[(j, i)];
            }
        }
        acc
    }
}

/// The full swap `S` and the partial swaps `S_AA'`, `S_BB'` on `H (x) H'`.
#[derive(Debug, Clone)]
pub struct SwapSet {
    space: BipartiteSpace,
    s: Permutation,
    s_aa: Permutation,
    s_bb: Permutation,
}

impl SwapSet {
    pub fn space(&self) -> BipartiteSpace {
        self.space
    }

    pub fn s(&self) -> &Permutation {
        &self.s
    }

    pub fn s_aa(&self) -> &Permutation {
        &self.s_aa
    }

    pub fn s_bb(&self) -> &Permutation {
        &self.s_bb
    }
}

pub fn build_swaps(space: BipartiteSpace) -> SwapSet {
    let (da, db) = (space.d_a(), space.d_b());
    let d = space.dim();
    let idx = |a: usize, b: usize, a2: usize, b2: usize| ((a * db + b) * da + a2) * db + b2;
    let mut s = vec![0; d * d];
    let mut s_aa = vec![0; d * d];
    let mut s_bb = vec![0; d * d];
    for a in 0..da {
        for b in 0..db {
            for a2 in 0..da {
                for b2 in 0..db {
                    let r = idx(a, b, a2, b2);
                    s[r] = idx(a2, b2, a, b);
                    s_aa[r] = idx(a2, b, a, b2);
                    s_bb[r] = idx(a, b2, a2, b);
                }
            }
        }
    }
    SwapSet {
        space,
        s: Permutation(s),
        s_aa: Permutation(s_aa),
        s_bb: Permutation(s_bb),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OtocKind {
    Unitary,
    Open,
    HaarMc { n_pairs: usize },
    OperatorEntanglement,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OtocSeries {
    pub kind: OtocKind,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Monte-Carlo standard errors, present for `HaarMc`.
    pub stderr: Option<Vec<f64>>,
}

impl OtocSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn max_abs_diff(&self, other: &OtocSeries) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn real_checked(z: Complex64, time: f64) -> Result<f64> {
    if z.im.abs() > RESIDUE_TOL {
        return Err(Error::ImaginaryResidue {
            time,
            residue: z.im.abs(),
        });
    }
    Ok(z.re)
}

fn check_hamiltonian(h: &ComplexMatrix, space: BipartiteSpace) -> Result<()> {
    h.ensure_hermitian()?;
    if h.rows() != space.dim() {
        return Err(Error::DimensionMismatch(format!(
            "Hamiltonian is {}x{}, bipartition has dimension {}",
            h.rows(),
            h.cols(),
            space.dim()
        )));
    }
    Ok(())
}

/// `1 - Tr(S_AA' U^{(x)2} S_AA' U^{dag (x)2}) / d^2`, contracted as
/// `1 - Tr((M M^dag)^2) / d^2` with the realignment `M[(a,c),(b,e)] = U[(a,b),(c,e)]`
/// so the two-copy operator is never formed.
pub fn otoc_of_unitary(u: &ComplexMatrix, swaps: &SwapSet) -> Result<f64> {
    let space = swaps.space;
    let (da, db, d) = (space.d_a(), space.d_b(), space.dim());
    if u.rows() != d || u.cols() != d {
        return Err(Error::DimensionMismatch(format!(
            "unitary is {}x{}, bipartition has dimension {d}",
            u.rows(),
            u.cols()
        )));
    }
    let m = ComplexMatrix::from_fn(da * da, db * db, |r, c| u[((r / da) * db + c / db, (r % da) * db + c % db)]);
    let gram = if da <= db {
        m.matmul(&m.adjoint())?
    } else {
        m.adjoint().matmul(&m)?
    };
    let tr: f64 = gram.as_slice().iter().map(|z| z.norm_sqr()).sum();
    Ok(1.0 - tr / (d * d) as f64)
}

pub fn otoc_unitary(h: &ComplexMatrix, space: BipartiteSpace, times: &[f64]) -> Result<OtocSeries> {
    check_hamiltonian(h, space)?;
    let evo = UnitaryEvolution::new(h)?;
    let swaps = build_swaps(space);
    let values = times
        .par_iter()
        .map(|&t| otoc_of_unitary(&evo.unitary(t), &swaps))
        .collect::<Result<Vec<_>>>()?;
    Ok(OtocSeries {
        kind: OtocKind::Unitary,
        times: times.to_vec(),
        values,
        stderr: None,
    })
}

/// `(1/d^2) Tr[(S d_B - S_AA') (E^dag (x) E^dag)(S_AA')]` for one adjoint map.
pub fn open_otoc_value(map: &Superoperator, swaps: &SwapSet, time: f64) -> Result<f64> {
    map.expect_picture(Picture::Adjoint)?;
    let d = swaps.space.dim();
    if map.dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "map acts on dimension {}, bipartition has dimension {d}",
            map.dim()
        )));
    }
    let x = apply_both(map.matrix(), &swaps.s_aa.to_matrix())?;
    let db = swaps.space.d_b() as f64;
    let z = (swaps.s.trace_with(&x) * db - swaps.s_aa.trace_with(&x)) / (d * d) as f64;
    real_checked(z, time)
}

pub fn otoc_open(props: &PropagatorFamily, space: BipartiteSpace) -> Result<OtocSeries> {
    let swaps = build_swaps(space);
    let values = props
        .iter()
        .map(|(t, map)| open_otoc_value(map, &swaps, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(OtocSeries {
        kind: OtocKind::Open,
        times: props.times.clone(),
        values,
        stderr: None,
    })
}

/// Same as [`otoc_open`] but holds a single propagator in memory at a time.
pub fn otoc_open_streaming(
    generator: &Superoperator,
    times: &[f64],
    space: BipartiteSpace,
) -> Result<OtocSeries> {
    generator.expect_picture(Picture::Adjoint)?;
    let swaps = build_swaps(space);
    let mut values = Vec::with_capacity(times.len());
    for item in PropagatorStream::new(generator, times)? {
        let (t, map) = item?;
        values.push(open_otoc_value(&map, &swaps, t)?);
    }
    Ok(OtocSeries {
        kind: OtocKind::Open,
        times: times.to_vec(),
        values,
        stderr: None,
    })
}

/// Heisenberg-picture dynamics fed to the Monte-Carlo estimator.
#[derive(Debug, Clone, Copy)]
pub enum HeisenbergDynamics<'a> {
    Unitary {
        hamiltonian: &'a ComplexMatrix,
        times: &'a [f64],
    },
    Channel(&'a PropagatorFamily),
}

/// `(1/2d) |[O, W_B]|_2^2` with `W_B = I_A (x) W`.
fn commutator_norm_sq(o: &ComplexMatrix, w_b: &ComplexMatrix) -> Result<f64> {
    let c = o.commutator(w_b)?;
    Ok(c.norm_hs().powi(2) / (2.0 * o.rows() as f64))
}

/// Mean and standard error of `(1/2d) |[E^dag(V (x) I), I (x) W]|_2^2`
/// over `n_pairs` independent Haar pairs.
pub fn haar_mc_estimate<F>(heisenberg: F, space: BipartiteSpace, n_pairs: usize, seed: u64, stream: u64) -> Result<(f64, f64)>
where
    F: Fn(&ComplexMatrix) -> Result<ComplexMatrix>,
{
    if n_pairs == 0 {
        return Err(Error::InvalidParameter("n_pairs must be >= 1".into()));
    }
    let mut rng = seeded_stream(seed, stream);
    let id_a = ComplexMatrix::identity(space.d_a());
    let id_b = ComplexMatrix::identity(space.d_b());
    let mut samples = Vec::with_capacity(n_pairs);
    for _ in 0..n_pairs {
        let v = haar_unitary_with(space.d_a(), &mut rng);
        let w = haar_unitary_with(space.d_b(), &mut rng);
        let evolved = heisenberg(&kron(&v, &id_b))?;
        samples.push(commutator_norm_sq(&evolved, &kron(&id_a, &w))?);
    }
    let n = n_pairs as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let stderr = if n_pairs > 1 {
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    Ok((mean, stderr))
}

/// Monte-Carlo estimate of the bipartite OTOC. Time point `k` draws from
/// stream `k` of `seed`, so results do not depend on evaluation order.
pub fn otoc_haar_mc(
    dynamics: HeisenbergDynamics<'_>,
    space: BipartiteSpace,
    n_pairs: usize,
    seed: u64,
) -> Result<OtocSeries> {
    let d = space.dim();
    let estimates: Vec<(f64, f64)> = match dynamics {
        HeisenbergDynamics::Unitary { hamiltonian, times } => {
            check_hamiltonian(hamiltonian, space)?;
            let evo = UnitaryEvolution::new(hamiltonian)?;
            times
                .par_iter()
                .enumerate()
                .map(|(k, &t)| {
                    let u = evo.unitary(t);
                    let u_dag = u.adjoint();
                    let heis = |x: &ComplexMatrix| u_dag.matmul(x)?.matmul(&u);
                    haar_mc_estimate(heis, space, n_pairs, seed, k as u64)
                })
                .collect::<Result<_>>()?
        }
        HeisenbergDynamics::Channel(props) => {
            if props.picture() != Picture::Adjoint {
                return Err(Error::PictureMismatch {
                    expected: Picture::Adjoint.name(),
                    found: props.picture().name(),
                });
            }
            if props.dim() != d {
                return Err(Error::DimensionMismatch(format!(
                    "propagators act on dimension {}, bipartition has dimension {d}",
                    props.dim()
                )));
            }
            props
                .maps
                .par_iter()
                .enumerate()
                .map(|(k, map)| haar_mc_estimate(|x| map.apply(x), space, n_pairs, seed, k as u64))
                .collect::<Result<_>>()?
        }
    };
    let times = match dynamics {
        HeisenbergDynamics::Unitary { times, .. } => times.to_vec(),
        HeisenbergDynamics::Channel(props) => props.times.clone(),
    };
    Ok(OtocSeries {
        kind: OtocKind::HaarMc { n_pairs },
        times,
        values: estimates.iter().map(|e| e.0).collect(),
        stderr: Some(estimates.iter().map(|e| e.1).collect()),
    })
}

/// Linear entropy `1 - Tr(sigma_U^2)` of `sigma_U = Tr_{BB'} |U><U|`,
/// `|U> = (U (x) I)|psi+>`.
pub fn operator_entanglement_of(u: &ComplexMatrix, space: BipartiteSpace) -> Result<f64> {
    let d = space.dim();
    if u.rows() != d || u.cols() != d {
        return Err(Error::DimensionMismatch(format!(
            "unitary is {}x{}, bipartition has dimension {d}",
            u.rows(),
            u.cols()
        )));
    }
    // <r, j|(U (x) I)|psi+> = U_{rj} / sqrt(d), i.e. the row-stacked U.
    let norm = 1.0 / (d as f64).sqrt();
    let psi: Vec<Complex64> = vectorize(u).into_iter().map(|z| z * norm).collect();
    let sigma = reduced_pure(&psi, &space.replica_factors(), &[0, 2])?;
    let purity = sigma.trace_product(&sigma)?;
    Ok(1.0 - purity.re)
}

pub fn operator_entanglement(h: &ComplexMatrix, space: BipartiteSpace, times: &[f64]) -> Result<OtocSeries> {
    check_hamiltonian(h, space)?;
    let evo = UnitaryEvolution::new(h)?;
    let values = times
        .par_iter()
        .map(|&t| operator_entanglement_of(&evo.unitary(t), space))
        .collect::<Result<Vec<_>>>()?;
    Ok(OtocSeries {
        kind: OtocKind::OperatorEntanglement,
        times: times.to_vec(),
        values,
        stderr: None,
    })
}
