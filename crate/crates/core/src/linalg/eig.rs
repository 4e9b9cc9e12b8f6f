use faer::Side;
use num_complex::Complex64;

use super::matrix::{ComplexMatrix, I};
use crate::error::{Error, Result};

/// Eigenvalues below this are treated as exactly zero by entropy routines.
pub const PSD_CLAMP: f64 = 1e-12;
/// Eigenvalues more negative than this mean the input is not a valid PSD matrix.
pub const PSD_NEGATIVE_TOL: f64 = 1e-10;

/// Eigendecomposition of a Hermitian matrix: ascending real eigenvalues and a
/// unitary matrix whose columns are the eigenvectors.
pub fn herm_eig(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    m.ensure_hermitian()?;
    let evd = m
        .as_faer()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Decomposition(format!("{e:?}")))?;
    let values = evd.S().column_vector().iter().map(|z| z.re).collect();
    Ok((values, ComplexMatrix::from_faer(evd.U())))
}

/// Applies `f` to the spectrum: `V diag(f(lambda)) V^dag`.
pub fn spectral_map(
    values: &[f64],
    vectors: &ComplexMatrix,
    f: impl Fn(f64) -> Complex64,
) -> ComplexMatrix {
    let n = values.len();
    let fv: Vec<Complex64> = values.iter().map(|&l| f(l)).collect();
    // V * diag(fv) without a full product, then one product with V^dag.
    let scaled = ComplexMatrix::from_fn(n, n, |i, j| vectors[(i, j)] * fv[j]);
    scaled.matmul(&vectors.adjoint()).expect("square factors")
}

/// Precomputed spectral decomposition of a Hamiltonian for `U_t = exp(-iHt)`.
#[derive(Debug, Clone)]
pub struct UnitaryEvolution {
    energies: Vec<f64>,
    basis: ComplexMatrix,
}

impl UnitaryEvolution {
    pub fn new(h: &ComplexMatrix) -> Result<Self> {
        let (energies, basis) = herm_eig(h)?;
        Ok(Self { energies, basis })
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn unitary(&self, t: f64) -> ComplexMatrix {
        spectral_map(&self.energies, &self.basis, |e| (-I * (e * t)).exp())
    }
}

/// Matrix logarithm of a positive semidefinite matrix on its support.
#[derive(Debug, Clone)]
pub struct PsdLog {
    /// `ln M` on the support, zero on the kernel.
    pub log: ComplexMatrix,
    /// Ascending eigenvalues after clamping (entries below the clamp are set to 0).
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
    /// Indices into `eigenvalues` treated as out-of-support.
    pub kernel: Vec<usize>,
}

pub fn log_psd(m: &ComplexMatrix, clamp: f64) -> Result<PsdLog> {
    let (mut values, vectors) = herm_eig(m)?;
    if let Some(&min) = values.first() {
        if min < -PSD_NEGATIVE_TOL {
            return Err(Error::NotPositive {
                min_eigenvalue: min,
            });
        }
    }
    let mut kernel = Vec::new();
    for (k, v) in values.iter_mut().enumerate() {
        if *v < clamp {
            *v = 0.0;
            kernel.push(k);
        }
    }
    let log = spectral_map(&values, &vectors, |l| {
        if l > 0.0 {
            Complex64::new(l.ln(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    Ok(PsdLog {
        log,
        eigenvalues: values,
        eigenvectors: vectors,
        kernel,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::testing::{random_hermitian, rng};
    use std::f64::consts::E;

    fn sigma_x() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
    }

    #[test]
    fn sigma_z_spectrum() {
        let sz = ComplexMatrix::from_real_diag(&[1.0, -1.0]);
        let (vals, vecs) = herm_eig(&sz).unwrap();
        assert_eq!(vals, vec![-1.0, 1.0]);
        assert!((vecs[(1, 0)].norm() - 1.0).abs() < 1e-15);
        assert!((vecs[(0, 1)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sigma_x_spectrum() {
        let (vals, vecs) = herm_eig(&sigma_x()).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-15 && (vals[1] - 1.0).abs() < 1e-15);
        let h = 1.0 / 2f64.sqrt();
        // (|0> - |1>)/sqrt 2 and (|0> + |1>)/sqrt 2, up to a global phase
        let minus = [h, -h];
        let plus = [h, h];
        for (col, expected) in [(0, minus), (1, plus)] {
            let overlap: Complex64 = (0..2).map(|i| vecs[(i, col)].conj() * expected[i]).sum();
            assert!((overlap.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn reconstruction_of_random_hermitian() {
        let m = random_hermitian(16, &mut rng(21));
        let (vals, vecs) = herm_eig(&m).unwrap();
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let mv = m.matmul(&vecs).unwrap();
        let vl = ComplexMatrix::from_fn(16, 16, |i, j| vecs[(i, j)] * vals[j]);
        assert!(mv.max_abs_diff(&vl) <= 1e-9 * m.max_abs());
        assert!(vecs.is_unitary(1e-10));
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(herm_eig(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn log_of_identity_and_diagonal() {
        let l = log_psd(&ComplexMatrix::identity(3), PSD_CLAMP).unwrap();
        assert!(l.log.max_abs() < 1e-15);
        assert!(l.kernel.is_empty());

        let l = log_psd(&ComplexMatrix::from_real_diag(&[E, E * E]), PSD_CLAMP).unwrap();
        assert!(l.log.max_abs_diff(&ComplexMatrix::from_real_diag(&[1.0, 2.0])) < 1e-14);
    }

    #[test]
    fn log_excludes_kernel() {
        let l = log_psd(&ComplexMatrix::from_real_diag(&[1.0, 0.0]), PSD_CLAMP).unwrap();
        assert!(l.log.max_abs() < 1e-15);
        assert_eq!(l.kernel.len(), 1);
        assert_eq!(l.eigenvalues[l.kernel[0]], 0.0);
    }

    #[test]
    fn log_clamps_tiny_negative_and_rejects_large_negative() {
        let l = log_psd(&ComplexMatrix::from_real_diag(&[0.5, -5e-11]), PSD_CLAMP).unwrap();
        assert_eq!(l.kernel.len(), 1);
        assert!(matches!(
            log_psd(&ComplexMatrix::from_real_diag(&[0.5, -1e-6]), PSD_CLAMP),
            Err(Error::NotPositive { .. })
        ));
    }

    #[test]
    fn unitary_evolution_is_unitary_and_exact() {
        let h = random_hermitian(6, &mut rng(4));
        let ev = UnitaryEvolution::new(&h).unwrap();
        let u = ev.unitary(0.7);
        assert!(u.is_unitary(1e-12));
        let reference = crate::linalg::expm::expm(&h.scale(-I * 0.7)).unwrap();
        assert!(u.max_abs_diff(&reference) < 1e-12);
        assert!(ev.unitary(0.0).max_abs_diff(&ComplexMatrix::identity(6)) < 1e-14);
    }
}
