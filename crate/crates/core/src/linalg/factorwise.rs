//! Applying a superoperator to one copy of an operator on `H (x) H'`.
//!
//! For `T = sum_k P_k (x) Q_k` with `P_k, Q_k` acting on `d`-dimensional spaces,
//! `(E (x) id)(T) = sum_k E(P_k) (x) Q_k`. Instead of forming the `d^4 x d^4`
//! two-copy map, the entries of `T` are regrouped so that the copy being acted
//! on becomes the row index of a `d^2 x d^2` matrix, which is then multiplied by
//! the vectorized map once.

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Copy {
    First,
    Second,
}

fn map_dim(map: &ComplexMatrix, target: &ComplexMatrix) -> Result<usize> {
    let d2 = map.dim()?;
    let d = (d2 as f64).sqrt().round() as usize;
    if d * d != d2 {
        return Err(Error::DimensionMismatch(format!(
            "superoperator side {d2} is not a perfect square"
        )));
    }
    if target.rows() != d2 || target.cols() != d2 {
        return Err(Error::DimensionMismatch(format!(
            "target must be {d2}x{d2} for a map on {d}x{d} operators, got {}x{}",
            target.rows(),
            target.cols()
        )));
    }
    Ok(d)
}

/// Realigns `T[(i,k),(j,l)]` into `M[(i,j),(k,l)]` (first copy) or
/// `M[(k,l),(i,j)]` (second copy), or the inverse when `inverse` is set.
fn realign(src: &ComplexMatrix, d: usize, copy: Copy, inverse: bool) -> ComplexMatrix {
    let d2 = d * d;
    let mut out = ComplexMatrix::zeros(d2, d2);
    let s = src.as_slice();
    let o = out.as_mut_slice();
    for i in 0..d {
        for k in 0..d {
            let row = i * d + k;
            for j in 0..d {
                for l in 0..d {
                    let t_idx = row * d2 + j * d + l;
                    let m_idx = match copy {
                        Copy::First => (i * d + j) * d2 + k * d + l,
                        Copy::Second => (k * d + l) * d2 + i * d + j,
                    };
                    if inverse {
                        o[t_idx] = s[m_idx];
                    } else {
                        o[m_idx] = s[t_idx];
                    }
                }
            }
        }
    }
    out
}

/// `(map (x) id)(target)` or `(id (x) map)(target)`.
pub fn apply_factorwise(map: &ComplexMatrix, target: &ComplexMatrix, copy: Copy) -> Result<ComplexMatrix> {
    let d = map_dim(map, target)?;
    let grouped = realign(target, d, copy, false);
    let mapped = map.matmul(&grouped)?;
    Ok(realign(&mapped, d, copy, true))
}

/// `(map (x) map)(target)`, first copy then second.
pub fn apply_both(map: &ComplexMatrix, target: &ComplexMatrix) -> Result<ComplexMatrix> {
    let once = apply_factorwise(map, target, Copy::First)?;
    apply_factorwise(map, &once, Copy::Second)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::ONE;
    use crate::linalg::tensor::{devectorize, kron, vectorize};
    use crate::linalg::testing::{random_matrix, rng};

    /// Dense `d^4 x d^4` superoperator of `E (x) E` built column by column
    /// from `E(|i><j|) (x) E(|k><l|)`.
    fn dense_two_copy(map: &ComplexMatrix, d: usize) -> ComplexMatrix {
        let d2 = d * d;
        let unit = |i: usize, j: usize| {
            let mut m = ComplexMatrix::zeros(d, d);
            m[(i, j)] = ONE;
            m
        };
        let apply = |x: &ComplexMatrix| {
            devectorize(&map.matvec(&vectorize(x)).unwrap(), d, d).unwrap()
        };
        let mut dense = ComplexMatrix::zeros(d2 * d2, d2 * d2);
        for i in 0..d {
            for k in 0..d {
                for j in 0..d {
                    for l in 0..d {
                        let col = (i * d + k) * d2 + j * d + l;
                        let image = vectorize(&kron(&apply(&unit(i, j)), &apply(&unit(k, l))));
                        for (row, v) in image.into_iter().enumerate() {
                            dense[(row, col)] = v;
                        }
                    }
                }
            }
        }
        dense
    }

    #[test]
    fn identity_map_leaves_target_unchanged() {
        let target = random_matrix(9, 9, &mut rng(1));
        let id = ComplexMatrix::identity(9);
        for copy in [Copy::First, Copy::Second] {
            assert_eq!(apply_factorwise(&id, &target, copy).unwrap(), target);
        }
    }

    #[test]
    fn acts_on_the_requested_factor_of_a_product() {
        let mut r = rng(2);
        let d = 3;
        let p = random_matrix(d, d, &mut r);
        let q = random_matrix(d, d, &mut r);
        let map = random_matrix(d * d, d * d, &mut r);
        let apply = |x: &ComplexMatrix| devectorize(&map.matvec(&vectorize(x)).unwrap(), d, d).unwrap();
        let t = kron(&p, &q);
        let first = apply_factorwise(&map, &t, Copy::First).unwrap();
        assert!(first.max_abs_diff(&kron(&apply(&p), &q)) < 1e-12);
        let second = apply_factorwise(&map, &t, Copy::Second).unwrap();
        assert!(second.max_abs_diff(&kron(&p, &apply(&q))) < 1e-12);
    }

    #[test]
    fn copies_commute() {
        let mut r = rng(3);
        let map_a = random_matrix(16, 16, &mut r);
        let map_b = random_matrix(16, 16, &mut r);
        let t = random_matrix(16, 16, &mut r);
        let ab = apply_factorwise(&map_b, &apply_factorwise(&map_a, &t, Copy::First).unwrap(), Copy::Second).unwrap();
        let ba = apply_factorwise(&map_a, &apply_factorwise(&map_b, &t, Copy::Second).unwrap(), Copy::First).unwrap();
        assert!(ab.max_abs_diff(&ba) < 1e-12);
    }

    #[test]
    fn both_copies_equal_dense_two_copy_map() {
        let mut r = rng(4);
        for d in [2, 3, 4] {
            let map = random_matrix(d * d, d * d, &mut r);
            let target = random_matrix(d * d, d * d, &mut r);
            let fast = apply_both(&map, &target).unwrap();
            let dense = dense_two_copy(&map, d);
            let slow = devectorize(&dense.matvec(&vectorize(&target)).unwrap(), d * d, d * d).unwrap();
            assert!(fast.max_abs_diff(&slow) < 1e-10, "d = {d}");
        }
    }

    #[test]
    fn dimension_errors() {
        let map = ComplexMatrix::identity(4);
        assert!(apply_factorwise(&map, &ComplexMatrix::identity(9), Copy::First).is_err());
        assert!(apply_factorwise(&ComplexMatrix::identity(3), &ComplexMatrix::identity(3), Copy::First).is_err());
    }
}
