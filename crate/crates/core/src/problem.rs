//! First-order boundary value problems on `[0, ∞)`:
//!
//! ```text
//! du/dx = f(x, u),   g(u(0), u(∞)) = 0,   u ∈ R^d
//! ```
//!
//! Jacobians of `f` and `g` are taken from the system when it supplies them
//! and fall back to forward differences otherwise.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// A first-order two-point boundary value problem on the half line.
///
/// `rhs` is only ever called with finite `x`. Implementations must be pure.
pub trait BvpSystem: Sync {
    fn dim(&self) -> usize;

    fn rhs(&self, x: f64, u: &[f64]) -> Vec<f64>;

    /// Boundary residual from the state at the origin and at infinity.
    fn boundary(&self, u0: &[f64], u_inf: &[f64]) -> Vec<f64>;

    /// `∂f/∂u`, if known in closed form.
    fn rhs_jacobian(&self, _x: f64, _u: &[f64]) -> Option<DMatrix<f64>> {
        None
    }

    /// `(∂g/∂u0, ∂g/∂u∞)`, if known in closed form.
    fn boundary_jacobian(
        &self,
        _u0: &[f64],
        _u_inf: &[f64],
    ) -> Option<(DMatrix<f64>, DMatrix<f64>)> {
        None
    }
}

impl<S: BvpSystem + ?Sized> BvpSystem for &S {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn rhs(&self, x: f64, u: &[f64]) -> Vec<f64> {
        (**self).rhs(x, u)
    }
    fn boundary(&self, u0: &[f64], u_inf: &[f64]) -> Vec<f64> {
        (**self).boundary(u0, u_inf)
    }
    fn rhs_jacobian(&self, x: f64, u: &[f64]) -> Option<DMatrix<f64>> {
        (**self).rhs_jacobian(x, u)
    }
    fn boundary_jacobian(&self, u0: &[f64], u_inf: &[f64]) -> Option<(DMatrix<f64>, DMatrix<f64>)> {
        (**self).boundary_jacobian(u0, u_inf)
    }
}

type RhsFn = Box<dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync>;
type BoundaryFn = Box<dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync>;
type RhsJacFn = Box<dyn Fn(f64, &[f64]) -> DMatrix<f64> + Send + Sync>;
type BoundaryJacFn = Box<dyn Fn(&[f64], &[f64]) -> (DMatrix<f64>, DMatrix<f64>) + Send + Sync>;

/// A [`BvpSystem`] assembled from closures.
pub struct FnSystem {
    dim: usize,
    rhs: RhsFn,
    boundary: BoundaryFn,
    rhs_jac: Option<RhsJacFn>,
    boundary_jac: Option<BoundaryJacFn>,
}

impl FnSystem {
    pub fn new(
        dim: usize,
        rhs: impl Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static,
        boundary: impl Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            rhs: Box::new(rhs),
            boundary: Box::new(boundary),
            rhs_jac: None,
            boundary_jac: None,
        }
    }

    pub fn with_rhs_jacobian(
        mut self,
        jac: impl Fn(f64, &[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Self {
        self.rhs_jac = Some(Box::new(jac));
        self
    }

    pub fn with_boundary_jacobian(
        mut self,
        jac: impl Fn(&[f64], &[f64]) -> (DMatrix<f64>, DMatrix<f64>) + Send + Sync + 'static,
    ) -> Self {
        self.boundary_jac = Some(Box::new(jac));
        self
    }
}

impl BvpSystem for FnSystem {
    fn dim(&self) -> usize {
        self.dim
    }
    fn rhs(&self, x: f64, u: &[f64]) -> Vec<f64> {
        (self.rhs)(x, u)
    }
    fn boundary(&self, u0: &[f64], u_inf: &[f64]) -> Vec<f64> {
        (self.boundary)(u0, u_inf)
    }
    fn rhs_jacobian(&self, x: f64, u: &[f64]) -> Option<DMatrix<f64>> {
        self.rhs_jac.as_ref().map(|j| j(x, u))
    }
    fn boundary_jacobian(&self, u0: &[f64], u_inf: &[f64]) -> Option<(DMatrix<f64>, DMatrix<f64>)> {
        self.boundary_jac.as_ref().map(|j| j(u0, u_inf))
    }
}

/// Node states `U_0 … U_N` stored row-major, one row of length `d` per node.
#[derive(Debug, Clone, PartialEq)]
pub struct StateMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl StateMatrix {
    pub fn zeros(nodes: usize, dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; nodes * dim],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    what: "state row",
                    expected: dim,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { dim, data })
    }

    pub fn from_flat(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || data.len() % dim != 0 {
            return Err(Error::DimensionMismatch {
                what: "flat state",
                expected: dim,
                got: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.data.len() / self.dim
        }
    }

    pub fn row(&self, n: usize) -> &[f64] {
        &self.data[n * self.dim..(n + 1) * self.dim]
    }

    pub fn row_mut(&mut self, n: usize) -> &mut [f64] {
        &mut self.data[n * self.dim..(n + 1) * self.dim]
    }

    /// Component `l` (zero based) of node `n`.
    pub fn get(&self, n: usize, l: usize) -> f64 {
        self.data[n * self.dim + l]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn column(&self, l: usize) -> Vec<f64> {
        self.data.iter().skip(l).step_by(self.dim).copied().collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Starting iterate for Newton's method.
pub trait InitialGuess {
    /// Guess at a finite coordinate `x ≥ 0`.
    fn at(&self, x: f64) -> Vec<f64>;

    /// Value used for the node at infinity.
    fn at_infinity(&self, mesh: &Mesh) -> Vec<f64>;

    /// Samples the guess on every node of `mesh`.
    fn sample(&self, mesh: &Mesh) -> Result<StateMatrix> {
        let n_int = mesh.intervals();
        let mut rows: Vec<Vec<f64>> = (0..n_int).map(|n| self.at(mesh.finite_node(n))).collect();
        rows.push(self.at_infinity(mesh));
        let states = StateMatrix::from_rows(&rows)?;
        if !states.is_finite() {
            return Err(Error::Evaluation {
                what: "initial guess",
                index: None,
            });
        }
        Ok(states)
    }
}

/// Relative base step for forward differences, `sqrt(ε_mach)`.
pub fn default_fd_step() -> f64 {
    f64::EPSILON.sqrt()
}

fn check_vector(v: &[f64], expected: usize, what: &'static str, index: Option<usize>) -> Result<()> {
    if v.len() != expected {
        return Err(Error::DimensionMismatch {
            what,
            expected,
            got: v.len(),
        });
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Evaluation { what, index });
    }
    Ok(())
}

/// Forward-difference `∂f/∂u`. Column `j` uses the step `eps·max(1, |u_j|)`.
pub fn fd_jacobian_f<S: BvpSystem + ?Sized>(sys: &S, x: f64, u: &[f64], eps: f64) -> Result<DMatrix<f64>> {
    if !(eps > 0.0) {
        return Err(Error::Config(format!("finite-difference step must be positive, got {eps}")));
    }
    let d = sys.dim();
    let f0 = sys.rhs(x, u);
    check_vector(&f0, d, "rhs", None)?;
    let mut jac = DMatrix::zeros(d, u.len());
    let mut probe = u.to_vec();
    for j in 0..u.len() {
        let h = eps * u[j].abs().max(1.0);
        probe[j] = u[j] + h;
        let step = probe[j] - u[j];
        let f1 = sys.rhs(x, &probe);
        check_vector(&f1, d, "rhs", None)?;
        for i in 0..d {
            jac[(i, j)] = (f1[i] - f0[i]) / step;
        }
        probe[j] = u[j];
    }
    Ok(jac)
}

/// Forward-difference `(∂g/∂u0, ∂g/∂u∞)`, perturbing both arguments.
pub fn fd_jacobian_g<S: BvpSystem + ?Sized>(
    sys: &S,
    u0: &[f64],
    u_inf: &[f64],
    eps: f64,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let d = sys.dim();
    let g0 = sys.boundary(u0, u_inf);
    check_vector(&g0, d, "boundary", None)?;
    let column = |left: &[f64], right: &[f64], step: f64, out: &mut DMatrix<f64>, j: usize| -> Result<()> {
        let g1 = sys.boundary(left, right);
        check_vector(&g1, d, "boundary", None)?;
        for i in 0..d {
            out[(i, j)] = (g1[i] - g0[i]) / step;
        }
        Ok(())
    };

    let mut d0 = DMatrix::zeros(d, u0.len());
    let mut probe = u0.to_vec();
    for j in 0..u0.len() {
        probe[j] = u0[j] + eps * u0[j].abs().max(1.0);
        let step = probe[j] - u0[j];
        column(&probe, u_inf, step, &mut d0, j)?;
        probe[j] = u0[j];
    }

    let mut dinf = DMatrix::zeros(d, u_inf.len());
    let mut probe = u_inf.to_vec();
    for j in 0..u_inf.len() {
        probe[j] = u_inf[j] + eps * u_inf[j].abs().max(1.0);
        let step = probe[j] - u_inf[j];
        column(u0, &probe, step, &mut dinf, j)?;
        probe[j] = u_inf[j];
    }
    Ok((d0, dinf))
}

/// `∂f/∂u` from the system if available, otherwise by forward differences.
pub fn rhs_jacobian<S: BvpSystem + ?Sized>(sys: &S, x: f64, u: &[f64]) -> Result<DMatrix<f64>> {
    match sys.rhs_jacobian(x, u) {
        Some(j) => {
            check_matrix(&j, sys.dim(), "rhs jacobian")?;
            Ok(j)
        }
        None => fd_jacobian_f(sys, x, u, default_fd_step()),
    }
}

pub fn boundary_jacobian<S: BvpSystem + ?Sized>(
    sys: &S,
    u0: &[f64],
    u_inf: &[f64],
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    match sys.boundary_jacobian(u0, u_inf) {
        Some((a, b)) => {
            check_matrix(&a, sys.dim(), "boundary jacobian")?;
            check_matrix(&b, sys.dim(), "boundary jacobian")?;
            Ok((a, b))
        }
        None => fd_jacobian_g(sys, u0, u_inf, default_fd_step()),
    }
}

fn check_matrix(m: &DMatrix<f64>, d: usize, what: &'static str) -> Result<()> {
    if m.nrows() != d || m.ncols() != d {
        return Err(Error::DimensionMismatch {
            what,
            expected: d,
            got: if m.nrows() != d { m.nrows() } else { m.ncols() },
        });
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Evaluation { what, index: None });
    }
    Ok(())
}

/// A problem found by [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Diagnostic {
    ZeroDimension,
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    NonFinite {
        what: &'static str,
    },
    JacobianDisagreement {
        what: &'static str,
        row: usize,
        col: usize,
        analytic: f64,
        approx: f64,
    },
}

/// Relative tolerance used by [`validate`] when comparing analytic Jacobians
/// with forward differences.
pub const JACOBIAN_CHECK_RTOL: f64 = 1e-4;

const PROBE_X: [f64; 3] = [0.0, 0.7, 3.5];
const PROBE_PATTERN: [f64; 7] = [0.3, -1.1, 1.7, -0.45, 0.9, -1.9, 1.25];

fn probe_state(d: usize, shift: usize) -> Vec<f64> {
    (0..d)
        .map(|j| PROBE_PATTERN[(j + shift) % PROBE_PATTERN.len()])
        .collect()
}

/// Checks that `f` and `g` produce finite `d`-vectors on probe inputs and
/// that supplied Jacobians agree with finite differences.
pub fn validate<S: BvpSystem + ?Sized>(sys: &S) -> Vec<Diagnostic> {
    let d = sys.dim();
    if d == 0 {
        return vec![Diagnostic::ZeroDimension];
    }
    let mut out = Vec::new();
    let push = |diag: Diagnostic, out: &mut Vec<Diagnostic>| {
        if !out.contains(&diag) {
            out.push(diag);
        }
    };

    for (k, &x) in PROBE_X.iter().enumerate() {
        let u = probe_state(d, k);
        let f = sys.rhs(x, &u);
        if f.len() != d {
            push(
                Diagnostic::DimensionMismatch {
                    what: "rhs",
                    expected: d,
                    got: f.len(),
                },
                &mut out,
            );
            continue;
        }
        if f.iter().any(|v| !v.is_finite()) {
            push(Diagnostic::NonFinite { what: "rhs" }, &mut out);
            continue;
        }
        if let Some(analytic) = sys.rhs_jacobian(x, &u) {
            if analytic.nrows() != d || analytic.ncols() != d {
                push(
                    Diagnostic::DimensionMismatch {
                        what: "rhs jacobian",
                        expected: d,
                        got: analytic.nrows().max(analytic.ncols()),
                    },
                    &mut out,
                );
            } else if let Ok(approx) = fd_jacobian_f(sys, x, &u, default_fd_step()) {
                if let Some(diag) = compare_jacobians("rhs jacobian", &analytic, &approx) {
                    push(diag, &mut out);
                }
            }
        }
    }

    for k in 0..2 {
        let u0 = probe_state(d, k);
        let u_inf = probe_state(d, k + 3);
        let g = sys.boundary(&u0, &u_inf);
        if g.len() != d {
            push(
                Diagnostic::DimensionMismatch {
                    what: "boundary",
                    expected: d,
                    got: g.len(),
                },
                &mut out,
            );
            continue;
        }
        if g.iter().any(|v| !v.is_finite()) {
            push(Diagnostic::NonFinite { what: "boundary" }, &mut out);
            continue;
        }
        if let Some((a0, ainf)) = sys.boundary_jacobian(&u0, &u_inf) {
            let shapes_ok = [&a0, &ainf].iter().all(|m| m.nrows() == d && m.ncols() == d);
            if !shapes_ok {
                push(
                    Diagnostic::DimensionMismatch {
                        what: "boundary jacobian",
                        expected: d,
                        got: a0.nrows().max(a0.ncols()).max(ainf.nrows()).max(ainf.ncols()),
                    },
                    &mut out,
                );
            } else if let Ok((f0, finf)) = fd_jacobian_g(sys, &u0, &u_inf, default_fd_step()) {
                for (analytic, approx) in [(&a0, &f0), (&ainf, &finf)] {
                    if let Some(diag) = compare_jacobians("boundary jacobian", analytic, approx) {
                        push(diag, &mut out);
                    }
                }
            }
        }
    }
    out
}

fn compare_jacobians(what: &'static str, analytic: &DMatrix<f64>, approx: &DMatrix<f64>) -> Option<Diagnostic> {
    for i in 0..analytic.nrows() {
        for j in 0..analytic.ncols() {
            let (a, b) = (analytic[(i, j)], approx[(i, j)]);
            let scale = a.abs().max(b.abs()).max(1.0);
            if !((a - b).abs() <= JACOBIAN_CHECK_RTOL * scale) {
                return Some(Diagnostic::JacobianDisagreement {
                    what,
                    row: i,
                    col: j,
                    analytic: a,
                    approx: b,
                });
            }
        }
    }
    None
}
