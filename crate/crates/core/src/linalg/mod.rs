//! Dense complex linear algebra shared by every other module.

pub mod eig;
pub mod expm;
pub mod factorwise;
pub mod haar;
pub mod matrix;
pub mod tensor;

#[cfg(test)]
pub(crate) mod testing;

pub use eig::{herm_eig, log_psd, spectral_map, PsdLog, UnitaryEvolution, PSD_CLAMP};
pub use expm::{expm, expm_bounded};
pub use factorwise::{apply_both, apply_factorwise, Copy};
pub use haar::{haar_unitary, haar_unitary_with, seeded_rng, seeded_stream, SeededRng};
pub use matrix::{ComplexMatrix, HERMITIAN_TOL, I, ONE, ZERO};
pub use tensor::{devectorize, kron, kron_all, kron_vec, partial_trace, reduced_pure, vectorize, BipartiteSpace};
