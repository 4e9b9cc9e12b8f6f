//! Random inputs for unit tests.

use num_complex::Complex64;

use super::haar::{ginibre, seeded_rng, SeededRng};
use super::matrix::ComplexMatrix;

pub fn rng(seed: u64) -> SeededRng {
    seeded_rng(seed)
}

pub fn random_matrix(rows: usize, cols: usize, rng: &mut SeededRng) -> ComplexMatrix {
    ginibre(rows, cols, rng)
}

pub fn random_hermitian(n: usize, rng: &mut SeededRng) -> ComplexMatrix {
    ginibre(n, n, rng).hermitian_part()
}

pub fn random_density(n: usize, rng: &mut SeededRng) -> ComplexMatrix {
    let g = ginibre(n, n, rng);
    let p = g.matmul(&g.adjoint()).unwrap();
    let tr = p.trace().re;
    p.scale(Complex64::new(1.0 / tr, 0.0))
}
