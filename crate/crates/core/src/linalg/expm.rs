//! Matrix exponential by scaling and squaring with diagonal Padé approximants
//! (Higham 2005 order selection, 1-norm based scaling).

use faer::linalg::solvers::Solve;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

/// Largest number of squarings allowed before reporting overflow.
pub const DEFAULT_MAX_SQUARINGS: u32 = 64;

const THETA_3: f64 = 1.495585217958292e-2;
const THETA_5: f64 = 2.539398330063230e-1;
const THETA_7: f64 = 9.504178996162932e-1;
const THETA_9: f64 = 2.097847961257068;
const THETA_13: f64 = 5.371920351148152;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

pub fn expm(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    expm_bounded(m, DEFAULT_MAX_SQUARINGS)
}

pub fn expm_bounded(m: &ComplexMatrix, max_squarings: u32) -> Result<ComplexMatrix> {
    let n = m.dim()?;
    let norm = m.norm_one();
    if !norm.is_finite() {
        return Err(Error::InvalidParameter(
            "matrix exponential of a non-finite matrix".into(),
        ));
    }
    if norm == 0.0 {
        return Ok(ComplexMatrix::identity(n));
    }

    for (theta, coeffs) in [
        (THETA_3, &B3[..]),
        (THETA_5, &B5[..]),
        (THETA_7, &B7[..]),
        (THETA_9, &B9[..]),
    ] {
        if norm <= theta {
            let (u, v) = pade_low(m, coeffs)?;
            return solve_pade(&u, &v);
        }
    }

    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil().max(0.0) as u32
    } else {
        0
    };
    if s > max_squarings {
        return Err(Error::ExpmOverflow {
            required: s,
            bound: max_squarings,
        });
    }
    let scaled = m.scale_real(0.5f64.powi(s as i32));
    let (u, v) = pade_13(&scaled)?;
    let mut r = solve_pade(&u, &v)?;
    for _ in 0..s {
        r = r.matmul(&r)?;
    }
    Ok(r)
}

/// Odd and even parts `(U, V)` of a Padé approximant of order 3, 5, 7 or 9.
fn pade_low(a: &ComplexMatrix, b: &[f64]) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let n = a.rows();
    let ident = ComplexMatrix::identity(n);
    let a2 = a.matmul(a)?;
    let mut power = ident.clone();
    let mut u_inner = ident.scale_real(b[1]);
    let mut v = ident.scale_real(b[0]);
    for k in 1..b.len() / 2 {
        power = power.matmul(&a2)?;
        u_inner += &power.scale_real(b[2 * k + 1]);
        v += &power.scale_real(b[2 * k]);
    }
    Ok((a.matmul(&u_inner)?, v))
}

fn pade_13(a: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let b = &B13;
    let n = a.rows();
    let ident = ComplexMatrix::identity(n);
    let a2 = a.matmul(a)?;
    let a4 = a2.matmul(&a2)?;
    let a6 = a4.matmul(&a2)?;

    let lin = |c6: f64, c4: f64, c2: f64| {
        let mut s = a6.scale_real(c6);
        s += &a4.scale_real(c4);
        s += &a2.scale_real(c2);
        s
    };

    let mut u_inner = a6.matmul(&lin(b[13], b[11], b[9]))?;
    u_inner += &lin(b[7], b[5], b[3]);
    u_inner += &ident.scale_real(b[1]);
    let u = a.matmul(&u_inner)?;

    let mut v = a6.matmul(&lin(b[12], b[10], b[8]))?;
    v += &lin(b[6], b[4], b[2]);
    v += &ident.scale_real(b[0]);
    Ok((u, v))
}

/// Solves `(V - U) R = (V + U)`.
fn solve_pade(u: &ComplexMatrix, v: &ComplexMatrix) -> Result<ComplexMatrix> {
    let p = v + u;
    let q = v - u;
    let lu = q.as_faer().partial_piv_lu();
    let sol = lu.solve(p.as_faer());
    let r = ComplexMatrix::from_faer(sol.as_ref());
    if r.as_slice().iter().any(|z| !z.is_finite()) {
        return Err(Error::Decomposition(
            "singular denominator in Padé approximant".into(),
        ));
    }
    Ok(r)
}

/// Truncated Taylor series; reference for small-norm cross-checks only.
#[cfg(test)]
pub(crate) fn expm_taylor(m: &ComplexMatrix, terms: usize) -> ComplexMatrix {
    let n = m.rows();
    let mut acc = ComplexMatrix::identity(n);
    let mut term = ComplexMatrix::identity(n);
    for k in 1..terms {
        term = term.matmul(m).unwrap().scale_real(1.0 / k as f64);
        acc += &term;
    }
    acc
}
