//! Vectorized Lindbladians in the Heisenberg (adjoint) and Schrodinger (state)
//! pictures, their propagators, and CPTP checks.
//!
//! Vectorization is row-stacking, so `vec(A X B) = (A (x) B^T) vec(X)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{devectorize, expm, herm_eig, kron, vectorize, ComplexMatrix, I};
use crate::models::{Jump, ModelSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Picture {
    Adjoint,
    State,
}

impl Picture {
    pub fn name(self) -> &'static str {
        match self {
            Picture::Adjoint => "adjoint",
            Picture::State => "state",
        }
    }

    pub fn flipped(self) -> Picture {
        match self {
            Picture::Adjoint => Picture::State,
            Picture::State => Picture::Adjoint,
        }
    }
}

impl fmt::Display for Picture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A linear map on `d x d` operators stored as a `d^2 x d^2` matrix acting on
/// row-stacked vectors. Used both for generators and for propagators.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: ComplexMatrix,
    picture: Picture,
}

impl Superoperator {
    pub fn new(matrix: ComplexMatrix, picture: Picture) -> Result<Self> {
        let d2 = matrix.dim()?;
        let dim = (d2 as f64).sqrt().round() as usize;
        if dim * dim != d2 {
            return Err(Error::DimensionMismatch(format!(
                "superoperator side {d2} is not a perfect square"
            )));
        }
        Ok(Self {
            dim,
            matrix,
            picture,
        })
    }

    pub fn identity(dim: usize, picture: Picture) -> Self {
        Self {
            dim,
            matrix: ComplexMatrix::identity(dim * dim),
            picture,
        }
    }

    /// Conjugation by a unitary: `X -> U^dag X U` (adjoint) or `X -> U X U^dag` (state).
    pub fn unitary_conjugation(u: &ComplexMatrix, picture: Picture) -> Result<Self> {
        u.dim()?;
        let matrix = match picture {
            Picture::Adjoint => kron(&u.adjoint(), &u.transpose()),
            Picture::State => kron(u, &u.conj()),
        };
        Self::new(matrix, picture)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn picture(&self) -> Picture {
        self.picture
    }

    pub fn expect_picture(&self, expected: Picture) -> Result<()> {
        if self.picture == expected {
            Ok(())
        } else {
            Err(Error::PictureMismatch {
                expected: expected.name(),
                found: self.picture.name(),
            })
        }
    }

    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.rows() != self.dim || x.cols() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "operand is {}x{}, map acts on {}x{}",
                x.rows(),
                x.cols(),
                self.dim,
                self.dim
            )));
        }
        let image = self.matrix.matvec(&vectorize(x))?;
        devectorize(&image, self.dim, self.dim)
    }

    /// Hilbert-Schmidt dual, which lives in the other picture.
    pub fn dual(&self) -> Superoperator {
        Superoperator {
            dim: self.dim,
            matrix: self.matrix.adjoint(),
            picture: self.picture.flipped(),
        }
    }

    /// The same map expressed in `picture`.
    pub fn in_picture(&self, picture: Picture) -> Superoperator {
        if self.picture == picture {
            self.clone()
        } else {
            self.dual()
        }
    }

    pub fn compose(&self, other: &Superoperator) -> Result<Superoperator> {
        if self.picture != other.picture {
            return Err(Error::PictureMismatch {
                expected: self.picture.name(),
                found: other.picture.name(),
            });
        }
        Superoperator::new(self.matrix.matmul(&other.matrix)?, self.picture)
    }

    /// `exp(t * self)`.
    pub fn exp(&self, t: f64) -> Result<Superoperator> {
        Ok(Superoperator {
            dim: self.dim,
            matrix: expm(&self.matrix.scale_real(t))?,
            picture: self.picture,
        })
    }

    /// Choi matrix `sum_ij |i><j| (x) E(|i><j|)` of the state-picture form.
    pub fn choi(&self) -> ComplexMatrix {
        let state = self.in_picture(Picture::State);
        let d = self.dim;
        let m = &state.matrix;
        ComplexMatrix::from_fn(d * d, d * d, |r, c| {
            let (i, a) = (r / d, r % d);
            let (j, b) = (c / d, c % d);
            m[(a * d + b, i * d + j)]
        })
    }
}

fn check_dims(h: &ComplexMatrix, jumps: &[Jump]) -> Result<usize> {
    let d = h.dim()?;
    for jump in jumps {
        if jump.operator.rows() != d || jump.operator.cols() != d {
            return Err(Error::DimensionMismatch(format!(
                "jump {} is {}x{}, Hamiltonian is {d}x{d}",
                jump.label,
                jump.operator.rows(),
                jump.operator.cols()
            )));
        }
    }
    Ok(d)
}

fn liouvillian(h: &ComplexMatrix, jumps: &[Jump], picture: Picture) -> Result<Superoperator> {
    let d = check_dims(h, jumps)?;
    let id = ComplexMatrix::identity(d);
    let sign = match picture {
        Picture::Adjoint => I,
        Picture::State => -I,
    };
    let mut total = (&kron(h, &id) - &kron(&id, &h.transpose())).scale(sign);
    for jump in jumps {
        if jump.rate == 0.0 {
            continue;
        }
        let l = &jump.operator;
        let ldl = l.adjoint().matmul(l)?;
        let sandwich = match picture {
            Picture::Adjoint => kron(&l.adjoint(), &l.transpose()),
            Picture::State => kron(l, &l.conj()),
        };
        let anti = &kron(&ldl, &id) + &kron(&id, &ldl.transpose());
        total += &(&sandwich - &anti.scale_real(0.5)).scale_real(jump.rate);
    }
    Superoperator::new(total, picture)
}

/// `L^dag` with `L^dag vec(O) = vec(i[H, O] + sum_k g_k (L_k^dag O L_k - {L_k^dag L_k, O}/2))`.
///
/// Rates are taken as given, including negative ones.
pub fn adjoint_liouvillian(h: &ComplexMatrix, jumps: &[Jump]) -> Result<Superoperator> {
    liouvillian(h, jumps, Picture::Adjoint)
}

/// `L` with `L vec(rho) = vec(-i[H, rho] + sum_k g_k (L_k rho L_k^dag - {L_k^dag L_k, rho}/2))`.
pub fn state_liouvillian(h: &ComplexMatrix, jumps: &[Jump]) -> Result<Superoperator> {
    liouvillian(h, jumps, Picture::State)
}

pub fn build_adjoint_liouvillian(model: &ModelSpec) -> Result<Superoperator> {
    model.validate()?;
    adjoint_liouvillian(&model.hamiltonian, &model.jumps)
}

pub fn build_state_liouvillian(model: &ModelSpec) -> Result<Superoperator> {
    model.validate()?;
    state_liouvillian(&model.hamiltonian, &model.jumps)
}

const GRID_TOL: f64 = 1e-9;

fn validate_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidParameter("time grid is empty".into()));
    }
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::InvalidParameter("times must be finite and non-negative".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("times must be strictly ascending".into()));
    }
    Ok(())
}

/// Spacing of a uniform grid with at least three points.
pub fn uniform_step(times: &[f64]) -> Option<f64> {
    if times.len() < 3 {
        return None;
    }
    let t0 = times[0];
    let dt = (times[times.len() - 1] - t0) / (times.len() - 1) as f64;
    let scale = times[times.len() - 1].abs().max(1.0);
    times
        .iter()
        .enumerate()
        .all(|(k, t)| (t - (t0 + k as f64 * dt)).abs() <= GRID_TOL * scale)
        .then_some(dt)
}

/// Lazily evaluated `exp(t L)` over a time grid. Uniform grids advance by
/// repeated multiplication with `exp(dt L)`.
pub struct PropagatorStream<'a> {
    generator: &'a Superoperator,
    times: &'a [f64],
    step: Option<ComplexMatrix>,
    current: Option<ComplexMatrix>,
    next: usize,
}

impl<'a> PropagatorStream<'a> {
    pub fn new(generator: &'a Superoperator, times: &'a [f64]) -> Result<Self> {
        validate_times(times)?;
        let step = match uniform_step(times) {
            Some(dt) => Some(expm(&generator.matrix.scale_real(dt))?),
            None => None,
        };
        Ok(Self {
            generator,
            times,
            step,
            current: None,
            next: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn advance(&mut self) -> Result<Superoperator> {
        let t = self.times[self.next];
        let matrix = match (&self.step, &self.current) {
            (Some(step), Some(prev)) => step.matmul(prev)?,
            _ if t == 0.0 => ComplexMatrix::identity(self.generator.matrix.rows()),
            _ => expm(&self.generator.matrix.scale_real(t))?,
        };
        if self.step.is_some() {
            self.current = Some(matrix.clone());
        }
        self.next += 1;
        Ok(Superoperator {
            dim: self.generator.dim,
            matrix,
            picture: self.generator.picture,
        })
    }
}

impl Iterator for PropagatorStream<'_> {
    type Item = Result<(f64, Superoperator)>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.next >= self.times.len() {
            return None;
        }
        let t = self.times[self.next];
        Some(self.advance().map(|m| (t, m)))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.times.len() - self.next;
        (left, Some(left))
    }
}

/// Time-indexed propagators `exp(t_i L)`.
#[derive(Debug, Clone)]
pub struct PropagatorFamily {
    pub times: Vec<f64>,
    pub maps: Vec<Superoperator>,
}

impl PropagatorFamily {
    pub fn picture(&self) -> Picture {
        self.maps[0].picture()
    }

    pub fn dim(&self) -> usize {
        self.maps[0].dim()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &Superoperator)> {
        self.times.iter().copied().zip(&self.maps)
    }
}

/// Stores one `d^2 x d^2` matrix per time point; for large `d` prefer
/// [`PropagatorStream`].
pub fn propagate(generator: &Superoperator, times: &[f64]) -> Result<PropagatorFamily> {
    let mut out_times = Vec::with_capacity(times.len());
    let mut maps = Vec::with_capacity(times.len());
    for item in PropagatorStream::new(generator, times)? {
        let (t, map) = item?;
        out_times.push(t);
        maps.push(map);
    }
    Ok(PropagatorFamily {
        times: out_times,
        maps,
    })
}

pub const CPTP_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct CptpSample {
    pub time: f64,
    /// `|E^dag(I) - I|`, equivalently the trace-preservation error of `E`.
    pub preservation_error: f64,
    pub hermiticity_error: f64,
    pub choi_min_eigenvalue: f64,
}

impl CptpSample {
    pub fn passed(&self) -> bool {
        self.preservation_error <= CPTP_TOL
            && self.hermiticity_error <= CPTP_TOL
            && self.choi_min_eigenvalue >= -CPTP_TOL
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CptpReport {
    pub picture: Picture,
    /// `|L^dag vec(I)|` or `|vec(I)^dag L|` of the generator.
    pub generator_error: f64,
    pub samples: Vec<CptpSample>,
}

impl CptpReport {
    pub fn passed(&self) -> bool {
        self.generator_error <= 1e-10 && self.samples.iter().all(CptpSample::passed)
    }

    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.generator_error > 1e-10 {
            out.push(format!("generator does not annihilate the identity: {:.3e}", self.generator_error));
        }
        for s in self.samples.iter().filter(|s| !s.passed()) {
            out.push(format!(
                "t = {}: preservation {:.3e}, hermiticity {:.3e}, choi min eigenvalue {:.3e}",
                s.time, s.preservation_error, s.hermiticity_error, s.choi_min_eigenvalue
            ));
        }
        out
    }
}

/// Max-norm of `M vec(I) - c vec(I)` (adjoint) or `M^dag vec(I) - c vec(I)` (state).
fn identity_residual(matrix: &ComplexMatrix, dim: usize, picture: Picture, c: f64) -> f64 {
    let vec_id = vectorize(&ComplexMatrix::identity(dim));
    let image = match picture {
        Picture::Adjoint => matrix.matvec(&vec_id),
        Picture::State => matrix.adjoint().matvec(&vec_id),
    }
    .expect("square superoperator");
    image
        .iter()
        .zip(&vec_id)
        .map(|(a, b)| (a - b * c).norm())
        .fold(0.0, f64::max)
}

pub fn check_cptp(generator: &Superoperator, t_samples: &[f64]) -> Result<CptpReport> {
    let generator_error = identity_residual(&generator.matrix, generator.dim, generator.picture, 0.0);

    let mut samples = Vec::with_capacity(t_samples.len());
    for &t in t_samples {
        let map = generator.exp(t)?;
        let choi = map.choi();
        // Hermiticity preservation is equivalent to a Hermitian Choi matrix.
        let hermiticity_error = choi.hermiticity_deviation();
        let (eigenvalues, _) = herm_eig(&choi.hermitian_part())?;
        samples.push(CptpSample {
            time: t,
            preservation_error: identity_residual(&map.matrix, map.dim, map.picture, 1.0),
            hermiticity_error,
            choi_min_eigenvalue: eigenvalues[0],
        });
    }
    Ok(CptpReport {
        picture: generator.picture,
        generator_error,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::testing::{random_density, random_hermitian, random_matrix, rng};
    use crate::linalg::UnitaryEvolution;
    use crate::models::{build_dicke, build_ising, AtomFieldParams, IsingParams, ModelKind};
    use crate::operators::Pauli;
    use crate::linalg::BipartiteSpace;
    use num_complex::Complex64;

    fn jump(op: ComplexMatrix, rate: f64) -> Jump {
        Jump {
            operator: op,
            rate,
            label: "L".into(),
        }
    }

    fn random_model(d: usize, n_jumps: usize, seed: u64) -> (ComplexMatrix, Vec<Jump>) {
        let mut r = rng(seed);
        let h = random_hermitian(d, &mut r);
        let jumps = (0..n_jumps)
            .map(|k| jump(random_matrix(d, d, &mut r), 0.1 * (k + 1) as f64))
            .collect();
        (h, jumps)
    }

    fn direct_adjoint(h: &ComplexMatrix, jumps: &[Jump], o: &ComplexMatrix) -> ComplexMatrix {
        let mut out = h.commutator(o).unwrap().scale(I);
        for j in jumps {
            let l = &j.operator;
            let ld = l.adjoint();
            let ldl = ld.matmul(l).unwrap();
            let term = &ld.matmul(o).unwrap().matmul(l).unwrap() - &ldl.anticommutator(o).unwrap().scale_real(0.5);
            out += &term.scale_real(j.rate);
        }
        out
    }

    fn direct_state(h: &ComplexMatrix, jumps: &[Jump], rho: &ComplexMatrix) -> ComplexMatrix {
        let mut out = h.commutator(rho).unwrap().scale(-I);
        for j in jumps {
            let l = &j.operator;
            let ld = l.adjoint();
            let ldl = ld.matmul(l).unwrap();
            let term = &l.matmul(rho).unwrap().matmul(&ld).unwrap() - &ldl.anticommutator(rho).unwrap().scale_real(0.5);
            out += &term.scale_real(j.rate);
        }
        out
    }

    #[test]
    fn zero_generator() {
        let h = ComplexMatrix::zeros(3, 3);
        for picture in [Picture::Adjoint, Picture::State] {
            let l = liouvillian(&h, &[], picture).unwrap();
            assert_eq!(l.matrix().max_abs(), 0.0);
        }
    }

    #[test]
    fn generators_match_direct_products() {
        let (h, jumps) = random_model(4, 3, 10);
        let adj = adjoint_liouvillian(&h, &jumps).unwrap();
        let st = state_liouvillian(&h, &jumps).unwrap();
        let mut r = rng(11);
        for _ in 0..5 {
            let o = random_matrix(4, 4, &mut r);
            assert!(adj.apply(&o).unwrap().max_abs_diff(&direct_adjoint(&h, &jumps, &o)) < 1e-12);
            assert!(st.apply(&o).unwrap().max_abs_diff(&direct_state(&h, &jumps, &o)) < 1e-12);
        }
    }

    #[test]
    fn duality_on_random_pairs() {
        let (h, jumps) = random_model(4, 2, 12);
        let adj = adjoint_liouvillian(&h, &jumps).unwrap();
        let st = state_liouvillian(&h, &jumps).unwrap();
        let mut r = rng(13);
        for _ in 0..20 {
            let o = random_matrix(4, 4, &mut r);
            let rho = random_density(4, &mut r);
            let lhs = adj.apply(&o).unwrap().adjoint().trace_product(&rho).unwrap();
            let rhs = o.adjoint().trace_product(&st.apply(&rho).unwrap()).unwrap();
            assert!((lhs - rhs).norm() < 1e-10);
        }
        assert!(adj.dual().matrix().max_abs_diff(st.matrix()) < 1e-12);
    }

    #[test]
    fn generators_annihilate_identity() {
        let (h, jumps) = random_model(5, 3, 14);
        for picture in [Picture::Adjoint, Picture::State] {
            let l = liouvillian(&h, &jumps, picture).unwrap();
            let report = check_cptp(&l, &[]).unwrap();
            assert!(report.generator_error < 1e-12, "{picture}");
        }
    }

    #[test]
    fn heisenberg_precession() {
        let h = Pauli::Z.matrix();
        let adj = adjoint_liouvillian(&h, &[]).unwrap();
        for t in [0.3, 1.0, 2.7] {
            let out = adj.exp(t).unwrap().apply(&Pauli::X.matrix()).unwrap();
            let expected = &Pauli::X.matrix().scale_real((2.0 * t).cos()) - &Pauli::Y.matrix().scale_real((2.0 * t).sin());
            assert!(out.max_abs_diff(&expected) < 1e-12, "t = {t}");
        }
    }

    /// Fourth-order Runge-Kutta on the 2x2 adjoint equation as an oracle.
    fn rk4_adjoint(h: &ComplexMatrix, jumps: &[Jump], o: &ComplexMatrix, t: f64, steps: usize) -> ComplexMatrix {
        let dt = t / steps as f64;
        let f = |x: &ComplexMatrix| direct_adjoint(h, jumps, x);
        let mut x = o.clone();
        for _ in 0..steps {
            let k1 = f(&x);
            let k2 = f(&(&x + &k1.scale_real(dt / 2.0)));
            let k3 = f(&(&x + &k2.scale_real(dt / 2.0)));
            let k4 = f(&(&x + &k3.scale_real(dt)));
            let incr = &(&k1 + &k2.scale_real(2.0)) + &(&k3.scale_real(2.0) + &k4);
            x += &incr.scale_real(dt / 6.0);
        }
        x
    }

    #[test]
    fn amplitude_damping_heisenberg_fixed_point() {
        let h = ComplexMatrix::zeros(2, 2);
        let jumps = [jump(Pauli::Minus.matrix(), 0.7)];
        let adj = adjoint_liouvillian(&h, &jumps).unwrap();
        for t in [0.5, 2.0] {
            let exact = adj.exp(t).unwrap().apply(&Pauli::Z.matrix()).unwrap();
            let ode = rk4_adjoint(&h, &jumps, &Pauli::Z.matrix(), t, 2000);
            assert!(exact.max_abs_diff(&ode) < 1e-10);
        }
        let late = adj.exp(60.0).unwrap().apply(&Pauli::Z.matrix()).unwrap();
        assert!(late.max_abs_diff(&ComplexMatrix::identity(2).scale_real(-1.0)) < 1e-12);
    }

    #[test]
    fn amplitude_damping_relaxes_to_lower_state() {
        let jumps = [jump(Pauli::Minus.matrix(), 0.5)];
        let st = state_liouvillian(&ComplexMatrix::zeros(2, 2), &jumps).unwrap();
        let rho0 = ComplexMatrix::from_real_rows(&[&[0.6, 0.3], &[0.3, 0.4]]).unwrap();
        let gamma = 0.5;
        for t in [0.0, 1.0, 3.0] {
            let rho = st.exp(t).unwrap().apply(&rho0).unwrap();
            let p_up = 0.6 * (-gamma * t).exp();
            let coh = 0.3 * (-gamma * t / 2.0).exp();
            let expected = ComplexMatrix::from_real_rows(&[&[p_up, coh], &[coh, 1.0 - p_up]]).unwrap();
            assert!(rho.max_abs_diff(&expected) < 1e-12);
        }
        let late = st.exp(120.0).unwrap().apply(&rho0).unwrap();
        let lower = ComplexMatrix::from_real_diag(&[0.0, 1.0]);
        assert!(late.max_abs_diff(&lower) < 1e-12);
    }

    #[test]
    fn zero_rates_reduce_to_unitary_conjugation() {
        let mut r = rng(15);
        let h = random_hermitian(4, &mut r);
        let adj = adjoint_liouvillian(&h, &[]).unwrap();
        let st = state_liouvillian(&h, &[]).unwrap();
        let evo = UnitaryEvolution::new(&h).unwrap();
        let v = random_matrix(4, 4, &mut r);
        for t in [0.5, 3.0] {
            let u = evo.unitary(t);
            let heis = u.adjoint().matmul(&v).unwrap().matmul(&u).unwrap();
            assert!(adj.exp(t).unwrap().apply(&v).unwrap().max_abs_diff(&heis) < 1e-8);
            let schr = u.matmul(&v).unwrap().matmul(&u.adjoint()).unwrap();
            assert!(st.exp(t).unwrap().apply(&v).unwrap().max_abs_diff(&schr) < 1e-8);
            let conj = Superoperator::unitary_conjugation(&u, Picture::Adjoint).unwrap();
            assert!(conj.matrix().max_abs_diff(adj.exp(t).unwrap().matrix()) < 1e-8);
        }
    }

    #[test]
    fn propagate_uniform_and_irregular_grids() {
        let (h, jumps) = random_model(3, 2, 16);
        let adj = adjoint_liouvillian(&h, &jumps).unwrap();
        let uniform: Vec<f64> = (0..21).map(|k| 0.25 * k as f64).collect();
        let family = propagate(&adj, &uniform).unwrap();
        assert_eq!(family.len(), 21);
        assert!(family.maps[0].matrix().max_abs_diff(&ComplexMatrix::identity(9)) < 1e-12);
        for (t, map) in family.iter() {
            assert!(map.matrix().max_abs_diff(adj.exp(t).unwrap().matrix()) < 1e-10);
        }
        // Semigroup spot check.
        let e_sum = family.maps[3].compose(&family.maps[5]).unwrap();
        assert!(e_sum.matrix().max_abs_diff(family.maps[8].matrix()) < 1e-8);

        let irregular = [0.1, 0.4, 2.0, 2.05];
        assert!(uniform_step(&irregular).is_none());
        let family = propagate(&adj, &irregular).unwrap();
        for (t, map) in family.iter() {
            assert!(map.matrix().max_abs_diff(adj.exp(t).unwrap().matrix()) < 1e-12);
        }
    }

    #[test]
    fn invalid_grids() {
        let adj = adjoint_liouvillian(&ComplexMatrix::identity(2), &[]).unwrap();
        assert!(propagate(&adj, &[]).is_err());
        assert!(propagate(&adj, &[1.0, 0.5]).is_err());
        assert!(propagate(&adj, &[-1.0]).is_err());
        assert!(propagate(&adj, &[f64::NAN]).is_err());
    }

    #[test]
    fn hermiticity_is_preserved() {
        let (h, jumps) = random_model(4, 3, 17);
        let adj = adjoint_liouvillian(&h, &jumps).unwrap();
        let v = random_hermitian(4, &mut rng(18));
        for t in [0.2, 1.5, 4.0] {
            let out = adj.exp(t).unwrap().apply(&v).unwrap();
            assert!(out.hermiticity_deviation() < 1e-9);
        }
    }

    #[test]
    fn unitary_family_passes_cptp() {
        let h = random_hermitian(3, &mut rng(19));
        let report = check_cptp(&adjoint_liouvillian(&h, &[]).unwrap(), &[0.5, 2.0]).unwrap();
        assert!(report.passed(), "{:?}", report.failures());
    }

    #[test]
    fn dicke_model_passes_cptp() {
        let p = AtomFieldParams {
            gamma: 0.05,
            kappa: 0.05,
            ..Default::default()
        };
        let model = build_dicke(&p).unwrap();
        for l in [
            build_adjoint_liouvillian(&model).unwrap(),
            build_state_liouvillian(&model).unwrap(),
        ] {
            let report = check_cptp(&l, &[0.5, 1.0, 5.0]).unwrap();
            assert!(report.passed(), "{:?}", report.failures());
        }
    }

    #[test]
    fn negated_rate_fails_choi_positivity() {
        let jumps = [jump(Pauli::Minus.matrix(), -0.3)];
        let l = adjoint_liouvillian(&Pauli::Z.matrix(), &jumps).unwrap();
        let report = check_cptp(&l, &[1.0]).unwrap();
        assert!(!report.passed());
        assert!(report.samples[0].choi_min_eigenvalue < -1e-3);
        assert!(report.samples[0].preservation_error < 1e-10);
    }

    #[test]
    fn choi_of_identity_is_unnormalized_bell_projector() {
        let choi = Superoperator::identity(2, Picture::State).choi();
        let mut expected = ComplexMatrix::zeros(4, 4);
        for (r, c) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            expected[(r, c)] = Complex64::new(1.0, 0.0);
        }
        assert_eq!(choi, expected);
    }

    #[test]
    fn picture_mismatch_and_dimension_errors() {
        let a = Superoperator::identity(2, Picture::Adjoint);
        let s = Superoperator::identity(2, Picture::State);
        assert!(matches!(a.compose(&s), Err(Error::PictureMismatch { .. })));
        assert!(a.expect_picture(Picture::State).is_err());
        assert!(a.apply(&ComplexMatrix::identity(3)).is_err());
        assert!(Superoperator::new(ComplexMatrix::identity(3), Picture::State).is_err());
        let bad = jump(ComplexMatrix::identity(3), 1.0);
        assert!(adjoint_liouvillian(&ComplexMatrix::identity(2), &[bad]).is_err());
    }

    #[test]
    fn ising_generator_dimension() {
        let p = IsingParams {
            gamma: 0.01,
            temperatures: vec![1.0],
            ..Default::default()
        };
        let model = build_ising(&p).unwrap();
        assert_eq!(model.kind, ModelKind::Ising);
        let l = build_adjoint_liouvillian(&model).unwrap();
        assert_eq!(l.dim(), 16);
        assert_eq!(l.matrix().rows(), 256);
        assert_eq!(model.space, BipartiteSpace::new(2, 8).unwrap());
    }
}
