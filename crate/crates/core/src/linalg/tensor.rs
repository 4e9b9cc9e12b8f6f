//! Kronecker products, partial traces and row-stacking vectorization.
//!
//! Composite indices are always ordered with the left factor slowest:
//! for `H_A (x) H_B` the basis state `|a>|b>` has index `a * d_B + b`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::matrix::{ComplexMatrix, ZERO};
use crate::error::{Error, Result};

/// Dimensions of a bipartition `H = H_A (x) H_B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BipartiteSpace {
    d_a: usize,
    d_b: usize,
}

impl BipartiteSpace {
    pub fn new(d_a: usize, d_b: usize) -> Result<Self> {
        if d_a == 0 || d_b == 0 {
            return Err(Error::InvalidParameter(format!(
                "subsystem dimensions must be positive, got ({d_a}, {d_b})"
            )));
        }
        Ok(Self { d_a, d_b })
    }

    #[inline]
    pub fn d_a(&self) -> usize {
        self.d_a
    }

    #[inline]
    pub fn d_b(&self) -> usize {
        self.d_b
    }

    /// Total dimension `d = d_A * d_B`.
    #[inline]
    pub fn dim(&self) -> usize {
        self.d_a * self.d_b
    }

    #[inline]
    pub fn index(&self, a: usize, b: usize) -> usize {
        debug_assert!(a < self.d_a && b < self.d_b);
        a * self.d_b + b
    }

    #[inline]
    pub fn split(&self, i: usize) -> (usize, usize) {
        (i / self.d_b, i % self.d_b)
    }

    /// Factor list `(A, B, A', B')` of the doubled space `H (x) H'`.
    pub fn replica_factors(&self) -> [usize; 4] {
        [self.d_a, self.d_b, self.d_a, self.d_b]
    }
}

pub fn kron(x: &ComplexMatrix, y: &ComplexMatrix) -> ComplexMatrix {
    let (ry, cy) = (y.rows(), y.cols());
    ComplexMatrix::from_fn(x.rows() * ry, x.cols() * cy, |r, c| {
        x[(r / ry, c / cy)] * y[(r % ry, c % cy)]
    })
}

/// Kronecker product of a list of factors, leftmost slowest.
pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a ComplexMatrix>) -> Option<ComplexMatrix> {
    factors.into_iter().fold(None, |acc, f| match acc {
        None => Some(f.clone()),
        Some(a) => Some(kron(&a, f)),
    })
}

pub fn kron_vec(u: &[Complex64], v: &[Complex64]) -> Vec<Complex64> {
    u.iter().flat_map(|&a| v.iter().map(move |&b| a * b)).collect()
}

/// Row-stacking: `vec(|i><j|) = |i> (x) |j>`, i.e. entry `(i, j)` goes to `i * cols + j`.
pub fn vectorize(m: &ComplexMatrix) -> Vec<Complex64> {
    m.as_slice().to_vec()
}

pub fn devectorize(v: &[Complex64], rows: usize, cols: usize) -> Result<ComplexMatrix> {
    if v.len() != rows * cols {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} cannot be devectorized to {rows}x{cols}",
            v.len()
        )));
    }
    ComplexMatrix::new(rows, cols, v.to_vec())
}

fn check_factors(dim: usize, dims: &[usize], keep: &[usize]) -> Result<()> {
    let prod: usize = dims.iter().product();
    if dims.is_empty() || prod != dim {
        return Err(Error::DimensionMismatch(format!(
            "factor dimensions {dims:?} do not multiply to {dim}"
        )));
    }
    for (n, &k) in keep.iter().enumerate() {
        if k >= dims.len() {
            return Err(Error::DimensionMismatch(format!(
                "kept factor {k} out of range for {} factors",
                dims.len()
            )));
        }
        if keep[..n].contains(&k) || (n > 0 && keep[n - 1] > k) {
            return Err(Error::InvalidParameter(format!(
                "kept factors must be strictly increasing, got {keep:?}"
            )));
        }
    }
    Ok(())
}

/// Mixed-radix digits of `idx` for the given factor dimensions (leftmost slowest).
fn digits(mut idx: usize, dims: &[usize], out: &mut [usize]) {
    for (slot, &d) in out.iter_mut().zip(dims).rev() {
        *slot = idx % d;
        idx /= d;
    }
}

fn compose(digits: &[usize], dims: &[usize], which: impl Iterator<Item = usize>) -> usize {
    which.fold(0, |acc, k| acc * dims[k] + digits[k])
}

/// Traces out every factor not listed in `keep`.
///
/// `dims` lists the factor dimensions of `m` (leftmost slowest); `keep` must be
/// strictly increasing. The result is ordered like the kept factors.
pub fn partial_trace(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    let dim = m.dim()?;
    check_factors(dim, dims, keep)?;
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let kept_dim: usize = keep.iter().map(|&k| dims[k]).product();
    let traced_dim: usize = traced.iter().map(|&k| dims[k]).product();

    // Full index as a function of (kept index, traced index).
    let mut full = vec![0usize; kept_dim * traced_dim];
    let mut dg = vec![0usize; dims.len()];
    for idx in 0..dim {
        digits(idx, dims, &mut dg);
        let k = compose(&dg, dims, keep.iter().copied());
        let t = compose(&dg, dims, traced.iter().copied());
        full[k * traced_dim + t] = idx;
    }

    Ok(ComplexMatrix::from_fn(kept_dim, kept_dim, |i, j| {
        (0..traced_dim).fold(ZERO, |acc, t| {
            acc + m[(full[i * traced_dim + t], full[j * traced_dim + t])]
        })
    }))
}

/// Reduced density matrix of the pure state `|psi><psi|` on the kept factors,
/// computed as `R R^dag` from the reshaped amplitude vector.
pub fn reduced_pure(psi: &[Complex64], dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    check_factors(psi.len(), dims, keep)?;
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let kept_dim: usize = keep.iter().map(|&k| dims[k]).product();
    let traced_dim: usize = traced.iter().map(|&k| dims[k]).product();

    let mut reshaped = ComplexMatrix::zeros(kept_dim, traced_dim);
    let mut dg = vec![0usize; dims.len()];
    for (idx, &amp) in psi.iter().enumerate() {
        digits(idx, dims, &mut dg);
        let k = compose(&dg, dims, keep.iter().copied());
        let t = compose(&dg, dims, traced.iter().copied());
        reshaped[(k, t)] = amp;
    }
    reshaped.matmul(&reshaped.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::testing::{random_matrix, rng};

    fn sigma_x() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
    }

    #[test]
    fn kron_identities() {
        let k = kron(&ComplexMatrix::identity(2), &ComplexMatrix::identity(3));
        assert_eq!(k, ComplexMatrix::identity(6));

        let d = kron(&ComplexMatrix::from_real_diag(&[1.0, 2.0]), &ComplexMatrix::identity(2));
        assert_eq!(d, ComplexMatrix::from_real_diag(&[1.0, 1.0, 2.0, 2.0]));
    }

    #[test]
    fn kron_sigma_x_flips_both_qubits() {
        let xx = kron(&sigma_x(), &sigma_x());
        let mut ket00 = vec![ZERO; 4];
        ket00[0] = Complex64::new(1.0, 0.0);
        let out = xx.matvec(&ket00).unwrap();
        let mut ket11 = vec![ZERO; 4];
        ket11[3] = Complex64::new(1.0, 0.0);
        assert_eq!(out, ket11);
    }

    #[test]
    fn kron_index_convention() {
        let mut r = rng(3);
        let x = random_matrix(2, 3, &mut r);
        let y = random_matrix(3, 2, &mut r);
        let k = kron(&x, &y);
        assert_eq!((k.rows(), k.cols()), (6, 6));
        for i in 0..2 {
            for j in 0..3 {
                for a in 0..3 {
                    for b in 0..2 {
                        assert_eq!(k[(i * 3 + a, j * 2 + b)], x[(i, j)] * y[(a, b)]);
                    }
                }
            }
        }
    }

    #[test]
    fn bipartite_index() {
        let s = BipartiteSpace::new(3, 4).unwrap();
        assert_eq!(s.dim(), 12);
        assert_eq!(s.index(2, 1), 9);
        assert_eq!(s.split(9), (2, 1));
        assert!(BipartiteSpace::new(0, 2).is_err());
    }

    #[test]
    fn vectorize_convention() {
        let mut m = ComplexMatrix::zeros(2, 2);
        m[(0, 1)] = Complex64::new(1.0, 0.0);
        let v = vectorize(&m);
        assert_eq!(v.iter().position(|z| z.re == 1.0), Some(1));
        assert!(devectorize(&v, 3, 2).is_err());
    }

    #[test]
    fn vec_round_trip() {
        let m = random_matrix(3, 3, &mut rng(11));
        assert_eq!(devectorize(&vectorize(&m), 3, 3).unwrap(), m);
    }

    #[test]
    fn partial_trace_of_product_state() {
        let mut r = rng(5);
        let a = random_matrix(2, 2, &mut r);
        let b = crate::linalg::testing::random_density(3, &mut r);
        let reduced = partial_trace(&kron(&a, &b), &[2, 3], &[0]).unwrap();
        assert!(reduced.max_abs_diff(&a) < 1e-14);
    }

    #[test]
    fn partial_trace_of_bell_state() {
        let h = 1.0 / 2f64.sqrt();
        let psi = [h, 0.0, 0.0, h].map(|x| Complex64::new(x, 0.0));
        let rho = ComplexMatrix::outer(&psi, &psi);
        let reduced = partial_trace(&rho, &[2, 2], &[0]).unwrap();
        assert!(reduced.max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-15);
        let via_pure = reduced_pure(&psi, &[2, 2], &[1]).unwrap();
        assert!(via_pure.max_abs_diff(&reduced) < 1e-15);
    }

    #[test]
    fn partial_trace_errors() {
        let m = ComplexMatrix::identity(6);
        assert!(matches!(
            partial_trace(&m, &[2, 2], &[0]),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(partial_trace(&m, &[2, 3], &[2]).is_err());
        assert!(partial_trace(&m, &[2, 3], &[1, 0]).is_err());
        assert!(partial_trace(&ComplexMatrix::zeros(2, 3), &[2, 3], &[0]).is_err());
    }

    #[test]
    fn partial_trace_keeps_middle_factors_in_order() {
        let mut r = rng(17);
        let a = random_matrix(2, 2, &mut r);
        let b = random_matrix(3, 3, &mut r);
        let c = random_matrix(2, 2, &mut r);
        let full = kron(&kron(&a, &b), &c);
        let kept = partial_trace(&full, &[2, 3, 2], &[0, 2]).unwrap();
        let expected = kron(&a, &c).scale(b.trace());
        assert!(kept.max_abs_diff(&expected) < 1e-12);
    }
}
