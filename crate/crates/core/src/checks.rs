//! Quick invariant suite behind `scramble check`.

use std::f64::consts::PI;

use crate::error::Result;
use crate::linalg::{
    apply_both, devectorize, haar_unitary, kron, seeded_rng, vectorize, BipartiteSpace, ComplexMatrix, ONE,
};
use crate::liouville::{
    build_adjoint_liouvillian, build_state_liouvillian, check_cptp, propagate, Picture, Superoperator,
};
use crate::models::{build_dicke, build_ising, build_tc, AtomFieldParams, IsingParams, ModelSpec};
use crate::scrambling::{build_swaps, operator_entanglement, otoc_open, otoc_unitary};
use crate::thermo::{entropy_production_unitary, ground_mixed_product};

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &'static str, result: Result<(bool, String)>) -> CheckOutcome {
    match result {
        Ok((passed, detail)) => CheckOutcome { name, passed, detail },
        Err(e) => CheckOutcome {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn grid(end: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| end * k as f64 / (n - 1) as f64).collect()
}

fn small_models() -> Result<Vec<ModelSpec>> {
    let af = AtomFieldParams {
        gamma: 0.05,
        kappa: 0.05,
        temp_a: 1.0,
        temp_b: 1.0,
        ..Default::default()
    };
    let ising = IsingParams {
        n_spins: 3,
        theta: 7.0 * PI / 16.0,
        gamma: 0.05,
        temperatures: vec![1.0],
        ..Default::default()
    };
    Ok(vec![build_dicke(&af)?, build_tc(&af)?, build_ising(&ising)?])
}

fn swap_algebra() -> Result<(bool, String)> {
    let mut ok = true;
    for (da, db) in [(2, 2), (2, 3), (3, 3)] {
        let sw = build_swaps(BipartiteSpace::new(da, db)?);
        ok &= sw.s_aa().compose(sw.s_bb()) == *sw.s();
        ok &= [sw.s(), sw.s_aa(), sw.s_bb()].iter().all(|p| p.compose(p).is_identity());
        ok &= sw.s().fixed_points() == da * db && sw.s_aa().fixed_points() == da * db * db;
    }
    Ok((ok, "(2,2), (2,3), (3,3)".into()))
}

fn liouvillian_structure() -> Result<(bool, String)> {
    let mut worst_identity: f64 = 0.0;
    let mut worst_duality: f64 = 0.0;
    for model in small_models()? {
        let adj = build_adjoint_liouvillian(&model)?;
        let st = build_state_liouvillian(&model)?;
        worst_identity = worst_identity.max(check_cptp(&adj, &[])?.generator_error);
        worst_identity = worst_identity.max(check_cptp(&st, &[])?.generator_error);
        worst_duality = worst_duality.max(adj.dual().matrix().max_abs_diff(st.matrix()));
    }
    Ok((
        worst_identity <= 1e-10 && worst_duality <= 1e-10,
        format!("identity residual {worst_identity:.2e}, duality residual {worst_duality:.2e}"),
    ))
}

fn cptp_samples() -> Result<(bool, String)> {
    let mut min_choi = f64::INFINITY;
    let mut ok = true;
    for model in small_models()? {
        let report = check_cptp(&build_adjoint_liouvillian(&model)?, &[0.5, 1.0, 5.0])?;
        ok &= report.passed();
        for s in &report.samples {
            min_choi = min_choi.min(s.choi_min_eigenvalue);
        }
    }
    Ok((ok, format!("min Choi eigenvalue {min_choi:.2e}")))
}

fn zero_dissipation() -> Result<(bool, String)> {
    let model = build_dicke(&AtomFieldParams::default())?;
    let times = grid(5.0, 21);
    let open = otoc_open(&propagate(&build_adjoint_liouvillian(&model)?, &times)?, model.space)?;
    let closed = otoc_unitary(&model.hamiltonian, model.space, &times)?;
    let diff = open.max_abs_diff(&closed);
    Ok((diff <= 1e-8, format!("max deviation {diff:.2e}")))
}

fn entanglement_identity() -> Result<(bool, String)> {
    let p = IsingParams {
        theta: 7.0 * PI / 16.0,
        ..Default::default()
    };
    let model = build_ising(&p)?;
    let times = grid(10.0, 21);
    let g = otoc_unitary(&model.hamiltonian, model.space, &times)?;
    let e = operator_entanglement(&model.hamiltonian, model.space, &times)?;
    let diff = g.max_abs_diff(&e);
    Ok((diff <= 1e-10, format!("max deviation {diff:.2e}")))
}

fn dense_two_copy() -> Result<(bool, String)> {
    let d = 4;
    let space = BipartiteSpace::new(2, 2)?;
    let mut rng = seeded_rng(11);
    let u = crate::linalg::haar_unitary_with(d * d, &mut rng);
    let map = Superoperator::new(u, Picture::Adjoint)?;
    let target = build_swaps(space).s_aa().to_matrix();
    let fast = apply_both(map.matrix(), &target)?;
    let unit = |i: usize, j: usize| {
        let mut m = ComplexMatrix::zeros(d, d);
        m[(i, j)] = ONE;
        m
    };
    let d2 = d * d;
    let mut dense = ComplexMatrix::zeros(d2 * d2, d2 * d2);
    for i in 0..d {
        for k in 0..d {
            for j in 0..d {
                for l in 0..d {
                    let col = (i * d + k) * d2 + j * d + l;
                    let image = vectorize(&kron(&map.apply(&unit(i, j))?, &map.apply(&unit(k, l))?));
                    for (row, v) in image.into_iter().enumerate() {
                        dense[(row, col)] = v;
                    }
                }
            }
        }
    }
    let slow = devectorize(&dense.matvec(&vectorize(&target))?, d2, d2)?;
    let diff = fast.max_abs_diff(&slow);
    Ok((diff <= 1e-10, format!("max deviation {diff:.2e}")))
}

fn thermo_identity() -> Result<(bool, String)> {
    let p = IsingParams {
        theta: 7.0 * PI / 16.0,
        ..Default::default()
    };
    let model = build_ising(&p)?;
    let (rho_s, rho_e) = ground_mixed_product(model.space, p.subsystem_a_ground_index())?;
    let series = entropy_production_unitary(&model.hamiltonian, model.space, &rho_s, &rho_e, &grid(10.0, 21))?;
    let diff = series
        .sum
        .iter()
        .zip(&series.env_relative)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let min_sigma = series.sigma.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((
        diff <= 1e-9 && min_sigma >= -1e-9 && series.violations.is_empty(),
        format!("identity residual {diff:.2e}, min sigma {min_sigma:.2e}"),
    ))
}

fn local_unitary_invariance() -> Result<(bool, String)> {
    let space = BipartiteSpace::new(2, 4)?;
    let swaps = build_swaps(space);
    let u = haar_unitary(8, 5);
    let base = crate::scrambling::otoc_of_unitary(&u, &swaps)?;
    let dress = kron(&haar_unitary(2, 6), &haar_unitary(4, 7));
    let moved = crate::scrambling::otoc_of_unitary(&dress.matmul(&u)?.matmul(&dress.adjoint())?, &swaps)?;
    let diff = (moved - base).abs();
    Ok((diff <= 1e-10, format!("deviation {diff:.2e}")))
}

pub fn run_checks() -> Vec<CheckOutcome> {
    vec![
        outcome("swap algebra", swap_algebra()),
        outcome("generator identity and duality", liouvillian_structure()),
        outcome("propagator CPTP", cptp_samples()),
        outcome("zero-dissipation reduction", zero_dissipation()),
        outcome("operator entanglement equals OTOC", entanglement_identity()),
        outcome("factorwise equals dense two-copy map", dense_two_copy()),
        outcome("entropy bookkeeping identity", thermo_identity()),
        outcome("local-unitary invariance", local_unitary_invariance()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        for c in run_checks() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
