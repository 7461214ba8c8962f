//! Structured Jacobian and linear solver checked against dense brute force.

use nalgebra::{DMatrix, DVector};
use nsfd::newton::{jacobian, residual, BlockJacobian};
use nsfd::problem::{fd_jacobian_f, FnSystem};
use nsfd::{models, BvpSystem, GridMap, MapKind, Mesh, StateMatrix};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn random_states(rng: &mut StdRng, nodes: usize, d: usize) -> StateMatrix {
    StateMatrix::from_flat(d, (0..nodes * d).map(|_| rng.gen_range(-2.0..2.0)).collect()).unwrap()
}

/// Central-difference Jacobian of the full residual, column by column.
fn dense_fd_jacobian<S: BvpSystem>(sys: &S, mesh: &Mesh, states: &StateMatrix) -> DMatrix<f64> {
    let size = states.as_slice().len();
    let mut out = DMatrix::zeros(size, size);
    for j in 0..size {
        let h = 1e-6 * states.as_slice()[j].abs().max(1.0);
        let mut plus = states.clone();
        plus.as_mut_slice()[j] += h;
        let mut minus = states.clone();
        minus.as_mut_slice()[j] -= h;
        let rp = residual(sys, mesh, &plus).unwrap();
        let rm = residual(sys, mesh, &minus).unwrap();
        for i in 0..size {
            out[(i, j)] = (rp[i] - rm[i]) / (2.0 * h);
        }
    }
    out
}

/// A cubic test system of dimension `d` that couples all components.
fn coupled_system(d: usize) -> FnSystem {
    FnSystem::new(
        d,
        move |x, u| {
            (0..d)
                .map(|i| u[(i + 1) % d] - 0.3 * u[i] * u[i] * u[(i + d - 1) % d] + 0.1 * x.sin())
                .collect()
        },
        move |u0, ui| {
            (0..d)
                .map(|i| if i % 2 == 0 { u0[i] - 0.5 } else { ui[i] + 0.2 * u0[0] })
                .collect()
        },
    )
}

fn max_rel_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(1.0))
        .fold(0.0, f64::max)
}

#[test]
fn mhd_structured_jacobian_matches_brute_force() {
    let mut rng = StdRng::seed_from_u64(8);
    let mesh = Mesh::new(GridMap::default(), 8).unwrap();
    let sys = models::mhd_system(0.7).unwrap();
    let states = random_states(&mut rng, 9, 3);
    let structured = jacobian(&sys, &mesh, &states).unwrap().to_dense();
    let brute = dense_fd_jacobian(&sys, &mesh, &states);
    assert!(max_rel_diff(&structured, &brute) < 1e-5);
}

#[test]
fn finite_difference_fallback_jacobian_matches_brute_force() {
    let mut rng = StdRng::seed_from_u64(21);
    for d in 1..=3 {
        let sys = coupled_system(d);
        let mesh = Mesh::new(GridMap::algebraic(1.3).unwrap(), 12).unwrap();
        let states = random_states(&mut rng, 13, d);
        let structured = jacobian(&sys, &mesh, &states).unwrap().to_dense();
        let brute = dense_fd_jacobian(&sys, &mesh, &states);
        assert!(max_rel_diff(&structured, &brute) < 1e-4, "d = {d}");
    }
}

fn random_block(rng: &mut StdRng, d: usize, diag: f64, spread: f64) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |i, j| {
        let base = if i == j { diag } else { 0.0 };
        base + rng.gen_range(-spread..spread)
    })
}

fn random_jacobian(rng: &mut StdRng, n_int: usize, d: usize) -> BlockJacobian {
    let left = (0..n_int).map(|_| random_block(rng, d, -1.0, 0.3)).collect();
    let right = (0..n_int).map(|_| random_block(rng, d, 1.0, 0.3)).collect();
    BlockJacobian::new(
        left,
        right,
        random_block(rng, d, 2.0, 0.5),
        random_block(rng, d, 0.0, 0.5),
    )
    .unwrap()
}

#[test]
fn structured_solve_matches_dense_lu() {
    let mut rng = StdRng::seed_from_u64(3);
    for &(n_int, d) in &[(16, 3), (2, 1), (5, 2), (32, 3), (9, 1)] {
        let jac = random_jacobian(&mut rng, n_int, d);
        let rhs: Vec<f64> = (0..jac.size()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = jac.solve(&rhs).unwrap();
        let dense = jac.to_dense().lu().solve(&DVector::from_column_slice(&rhs)).unwrap();
        let err = x.iter().zip(dense.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let scale = dense.amax().max(1.0);
        assert!(err / scale < 1e-10, "N = {n_int}, d = {d}: {err}");

        let back = jac.mul_vec(&x);
        let res = back.iter().zip(&rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(res < 1e-10 * rhs.iter().fold(1.0_f64, |m, v| m.max(v.abs())));
    }
}

#[test]
fn pure_difference_operator_matches_dense_lu() {
    let n_int = 8;
    let one = |v: f64| DMatrix::from_element(1, 1, v);
    let jac = BlockJacobian::new(vec![one(-1.0); n_int], vec![one(1.0); n_int], one(1.0), one(0.0)).unwrap();
    let rhs: Vec<f64> = (0..=n_int).map(|k| (k as f64).cos()).collect();
    let x = jac.solve(&rhs).unwrap();
    let dense = jac.to_dense().lu().solve(&DVector::from_column_slice(&rhs)).unwrap();
    for (a, b) in x.iter().zip(dense.iter()) {
        assert!((a - b).abs() <= 1e-12);
    }
}

#[test]
fn non_separated_boundary_conditions() {
    // Periodic-like coupling U_0 - U_N in every component.
    let mut rng = StdRng::seed_from_u64(99);
    let d = 2;
    let n_int = 10;
    let left = (0..n_int).map(|_| random_block(&mut rng, d, -1.0, 0.2)).collect();
    let right = (0..n_int).map(|_| random_block(&mut rng, d, 1.3, 0.2)).collect();
    let eye = DMatrix::<f64>::identity(d, d);
    let jac = BlockJacobian::new(left, right, eye.clone(), -eye).unwrap();
    let rhs: Vec<f64> = (0..jac.size()).map(|k| (k as f64 * 0.37).sin()).collect();
    let x = jac.solve(&rhs).unwrap();
    let dense = jac.to_dense().lu().solve(&DVector::from_column_slice(&rhs)).unwrap();
    for (a, b) in x.iter().zip(dense.iter()) {
        assert!((a - b).abs() <= 1e-10 * dense.amax().max(1.0));
    }
}

#[test]
fn mhd_analytic_jacobian_matches_finite_differences() {
    let mut rng = StdRng::seed_from_u64(2024);
    for _ in 0..100 {
        let beta = rng.gen_range(0.0..2.0);
        let sys = models::mhd_system(beta).unwrap();
        let u: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let analytic = sys.rhs_jacobian(1.0, &u).unwrap();
        let fd = fd_jacobian_f(&sys, 1.0, &u, nsfd::problem::default_fd_step()).unwrap();
        assert!(max_rel_diff(&analytic, &fd) <= 1e-6);
    }
}

#[test]
fn both_maps_supported_by_newton() {
    let sys = models::mhd_system(0.5).unwrap();
    let cfg = nsfd::NewtonConfig::default();
    let mut shears = Vec::new();
    for kind in [MapKind::Logarithmic, MapKind::Algebraic] {
        let mesh = Mesh::new(GridMap::new(kind, 2.0).unwrap(), 400).unwrap();
        let guess = nsfd::InitialGuess::sample(&models::mhd_initial_guess(), &mesh).unwrap();
        let sol = nsfd::newton_solve(&sys, &mesh, guess, &cfg).unwrap();
        assert!(sol.converged);
        shears.push(models::wall_shear(&sol).unwrap());
    }
    assert!((shears[0] - shears[1]).abs() < 1e-5);
}
