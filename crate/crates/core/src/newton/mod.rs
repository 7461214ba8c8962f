//! Discrete equations of the non-standard scheme and their Newton solution.
//!
//! On interval `n` the scheme reads
//!
//! ```text
//! U_{n+1} - U_n - a_n f(x_{n+1/2}, b_n U_{n+1} + c_n U_n) = 0,   n = 0 … N-1
//! g(U_0, U_N) = 0
//! ```
//!
//! with `a, b, c` from [`Mesh::coeffs`]. Only the finite midpoint `x_{n+1/2}`
//! is passed to `f`; `U_N` is the value at infinity.

mod linear;

pub use linear::{BlockJacobian, SINGULAR_RTOL};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::problem::{self, BvpSystem, StateMatrix};

/// Mean update that triggers the divergence guard, relative to the first
/// Newton update.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

const MIN_STEP: f64 = 1.0 / 1024.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonConfig {
    /// Bound on the mean absolute update `Σ|ΔU| / (d (N+1))`.
    pub tol: f64,
    pub max_iter: usize,
    /// Step shrink factor applied while the residual grows. `1.0` is plain
    /// Newton.
    pub damping: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 50,
            damping: 1.0,
        }
    }
}

impl NewtonConfig {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Config(format!("tolerance must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::Config(format!("damping must lie in (0, 1], got {}", self.damping)));
        }
        Ok(())
    }
}

/// Converged (or last) Newton iterate on a mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionGrid {
    pub mesh: Mesh,
    pub states: StateMatrix,
    /// Number of linear solves performed.
    pub iterations: usize,
    pub converged: bool,
    /// Mean absolute update of the last iteration.
    pub final_update_norm: f64,
}

impl SolutionGrid {
    pub fn dim(&self) -> usize {
        self.states.dim()
    }
}

fn check_shapes<S: BvpSystem + ?Sized>(sys: &S, mesh: &Mesh, states: &StateMatrix) -> Result<()> {
    if states.dim() != sys.dim() {
        return Err(Error::DimensionMismatch {
            what: "state columns",
            expected: sys.dim(),
            got: states.dim(),
        });
    }
    if states.rows() != mesh.node_count() {
        return Err(Error::DimensionMismatch {
            what: "state rows",
            expected: mesh.node_count(),
            got: states.rows(),
        });
    }
    Ok(())
}

fn midpoint_state(u_left: &[f64], u_right: &[f64], b: f64, c: f64) -> Vec<f64> {
    u_left
        .iter()
        .zip(u_right)
        .map(|(l, r)| b * r + c * l)
        .collect()
}

fn checked(values: Vec<f64>, d: usize, what: &'static str, index: Option<usize>) -> Result<Vec<f64>> {
    if values.len() != d {
        return Err(Error::DimensionMismatch {
            what,
            expected: d,
            got: values.len(),
        });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Evaluation { what, index });
    }
    Ok(values)
}

/// Residual of the scheme: `N` interval blocks followed by the boundary block.
pub fn residual<S: BvpSystem + ?Sized>(sys: &S, mesh: &Mesh, states: &StateMatrix) -> Result<Vec<f64>> {
    check_shapes(sys, mesh, states)?;
    let d = sys.dim();
    let n_int = mesh.intervals();
    let mut out = Vec::with_capacity(d * (n_int + 1));
    for (n, k) in mesh.coeffs().iter().enumerate() {
        let (ul, ur) = (states.row(n), states.row(n + 1));
        let f = checked(
            sys.rhs(mesh.midpoint(n), &midpoint_state(ul, ur, k.b, k.c)),
            d,
            "rhs",
            Some(n),
        )?;
        out.extend((0..d).map(|l| ur[l] - ul[l] - k.a * f[l]));
    }
    let g = checked(sys.boundary(states.row(0), states.row(n_int)), d, "boundary", None)?;
    out.extend(g);
    Ok(out)
}

/// Newton matrix of [`residual`]. Interval `n` contributes `-I - a c J_f` on
/// node `n` and `I - a b J_f` on node `n + 1`.
pub fn jacobian<S: BvpSystem + ?Sized>(sys: &S, mesh: &Mesh, states: &StateMatrix) -> Result<BlockJacobian> {
    check_shapes(sys, mesh, states)?;
    let d = sys.dim();
    let n_int = mesh.intervals();
    let eye = DMatrix::<f64>::identity(d, d);
    let mut left = Vec::with_capacity(n_int);
    let mut right = Vec::with_capacity(n_int);
    for (n, k) in mesh.coeffs().iter().enumerate() {
        let u_mid = midpoint_state(states.row(n), states.row(n + 1), k.b, k.c);
        let jf = problem::rhs_jacobian(sys, mesh.midpoint(n), &u_mid).map_err(|e| match e {
            Error::Evaluation { what, .. } => Error::Evaluation { what, index: Some(n) },
            other => other,
        })?;
        left.push(-&eye - &jf * (k.a * k.c));
        right.push(&eye - &jf * (k.a * k.b));
    }
    let (g0, ginf) = problem::boundary_jacobian(sys, states.row(0), states.row(n_int))?;
    BlockJacobian::new(left, right, g0, ginf)
}

/// Solves `J Δ = rhs` with the bordered block elimination of [`BlockJacobian`].
pub fn solve_linear(jac: &BlockJacobian, rhs: &[f64]) -> Result<Vec<f64>> {
    jac.solve(rhs)
}

fn mean_abs(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum::<f64>() / v.len() as f64
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Newton iteration from `guess` until the mean absolute update drops to
/// `cfg.tol`.
///
/// Running out of iterations is not an error; the result carries
/// `converged = false`.
pub fn newton_solve<S: BvpSystem + ?Sized>(
    sys: &S,
    mesh: &Mesh,
    guess: StateMatrix,
    cfg: &NewtonConfig,
) -> Result<SolutionGrid> {
    cfg.validate()?;
    check_shapes(sys, mesh, &guess)?;
    if !guess.is_finite() {
        return Err(Error::Evaluation {
            what: "initial guess",
            index: None,
        });
    }

    let mut states = guess;
    let mut res = residual(sys, mesh, &states)?;
    let mut first_norm: Option<f64> = None;
    let mut update_norm = f64::INFINITY;

    for iteration in 1..=cfg.max_iter {
        let jac = jacobian(sys, mesh, &states)?;
        let neg: Vec<f64> = res.iter().map(|r| -r).collect();
        let delta = jac.solve(&neg).map_err(|e| Error::LinearSolve {
            iteration,
            source: Box::new(e),
        })?;

        let mut step = 1.0;
        let (next, next_res) = loop {
            let mut trial = states.clone();
            for (u, du) in trial.as_mut_slice().iter_mut().zip(&delta) {
                *u += step * du;
            }
            let trial_res = residual(sys, mesh, &trial);
            if cfg.damping >= 1.0 {
                break (trial, trial_res?);
            }
            match trial_res {
                Ok(r) if max_abs(&r) <= max_abs(&res) || step * cfg.damping < MIN_STEP => {
                    break (trial, r)
                }
                Err(e) if step * cfg.damping < MIN_STEP => return Err(e),
                _ => step *= cfg.damping,
            }
        };

        update_norm = step * mean_abs(&delta);
        states = next;
        res = next_res;

        let reference = *first_norm.get_or_insert(update_norm);
        if update_norm > DIVERGENCE_FACTOR * reference {
            return Err(Error::Divergence {
                iteration,
                update_norm,
            });
        }
        if update_norm <= cfg.tol {
            return Ok(SolutionGrid {
                mesh: mesh.clone(),
                states,
                iterations: iteration,
                converged: true,
                final_update_norm: update_norm,
            });
        }
    }

    Ok(SolutionGrid {
        mesh: mesh.clone(),
        states,
        iterations: cfg.max_iter,
        converged: false,
        final_update_norm: update_norm,
    })
}
