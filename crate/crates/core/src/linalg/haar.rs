use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::matrix::ComplexMatrix;

/// Seeded generator used for every stochastic routine in the crate.
pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` of the generator seeded with `seed`.
pub fn seeded_stream(seed: u64, stream: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Matrix of i.i.d. complex standard normals, `(x + iy)/sqrt(2)`.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * s, im * s)
    })
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of
/// `diag(R)` moved into `Q`.
pub fn haar_unitary_with<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    assert!(dim >= 1, "Haar unitary needs dim >= 1");
    let z = ginibre(dim, dim, rng);
    let qr = z.as_faer().qr();
    let q = qr.compute_Q();
    let r = qr.R();
    let phases: Vec<Complex64> = (0..dim)
        .map(|k| {
            let d = r[(k, k)];
            let n = d.norm();
            if n > 0.0 {
                d / n
            } else {
                Complex64::new(1.0, 0.0)
            }
        })
        .collect();
    ComplexMatrix::from_fn(dim, dim, |i, j| q[(i, j)] * phases[j])
}

pub fn haar_unitary(dim: usize, seed: u64) -> ComplexMatrix {
    haar_unitary_with(dim, &mut seeded_rng(seed))
}
