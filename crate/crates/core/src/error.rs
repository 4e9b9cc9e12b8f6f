use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max |M - M^dag| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("matrix exponential scaling exponent {required} exceeds bound {bound}")]
    ExpmOverflow { required: u32, bound: u32 },

    #[error("decomposition failed: {0}")]
    Decomposition(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("superoperator picture mismatch: expected {expected}, got {found}")]
    PictureMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("imaginary residue {residue:e} exceeds tolerance at t = {time}")]
    ImaginaryResidue { time: f64, residue: f64 },

    #[error("relative entropy diverges (support violation) at t = {time}")]
    SupportViolation { time: f64 },
}
