//! Block two-diagonal Jacobian with a boundary border, and its solver.
//!
//! Unknowns are ordered node by node, `(U_0, U_1, …, U_N)`. Rows `n·d ..
//! (n+1)·d` hold interval `n`, which couples node blocks `n` and `n + 1`; the
//! last `d` rows hold the boundary conditions, which couple block `0` with
//! block `N`.
//!
//! The solver runs Gaussian elimination with partial pivoting column by
//! column. Every live row is kept as a window of `2d` entries starting at the
//! current pivot column plus a dense "spike" for the `d` columns of node `N`.
//! Fill never leaves that window, so the factorization costs `O(N d³)` and
//! needs no dense storage. The trailing `d × d` system left in the spike
//! columns is solved densely.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Pivots smaller than this fraction of the largest matrix entry are
/// treated as zero.
pub const SINGULAR_RTOL: f64 = 1e-13;

/// Newton matrix of the scheme, stored by blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockJacobian {
    dim: usize,
    /// Block multiplying `U_n` in interval `n`.
    pub(crate) left: Vec<DMatrix<f64>>,
    /// Block multiplying `U_{n+1}` in interval `n`.
    pub(crate) right: Vec<DMatrix<f64>>,
    pub(crate) bc_origin: DMatrix<f64>,
    pub(crate) bc_infinity: DMatrix<f64>,
}

impl BlockJacobian {
    pub fn new(
        left: Vec<DMatrix<f64>>,
        right: Vec<DMatrix<f64>>,
        bc_origin: DMatrix<f64>,
        bc_infinity: DMatrix<f64>,
    ) -> Result<Self> {
        let dim = bc_origin.nrows();
        if dim == 0 {
            return Err(Error::Config("empty boundary block".into()));
        }
        if left.len() != right.len() || left.is_empty() {
            return Err(Error::DimensionMismatch {
                what: "interval blocks",
                expected: left.len().max(1),
                got: right.len(),
            });
        }
        let square = |m: &DMatrix<f64>| m.nrows() == dim && m.ncols() == dim;
        let all_square = left.iter().chain(right.iter()).all(square)
            && square(&bc_origin)
            && square(&bc_infinity);
        if !all_square {
            return Err(Error::DimensionMismatch {
                what: "jacobian block",
                expected: dim,
                got: left
                    .iter()
                    .chain(right.iter())
                    .chain([&bc_origin, &bc_infinity])
                    .map(|m| if m.nrows() != dim { m.nrows() } else { m.ncols() })
                    .find(|&k| k != dim)
                    .unwrap_or(dim),
            });
        }
        Ok(Self {
            dim,
            left,
            right,
            bc_origin,
            bc_infinity,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn intervals(&self) -> usize {
        self.left.len()
    }

    /// Total number of unknowns, `d (N + 1)`.
    pub fn size(&self) -> usize {
        self.dim * (self.intervals() + 1)
    }

    pub fn left_block(&self, n: usize) -> &DMatrix<f64> {
        &self.left[n]
    }

    pub fn right_block(&self, n: usize) -> &DMatrix<f64> {
        &self.right[n]
    }

    pub fn boundary_blocks(&self) -> (&DMatrix<f64>, &DMatrix<f64>) {
        (&self.bc_origin, &self.bc_infinity)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let d = self.dim;
        let n_int = self.intervals();
        let size = self.size();
        let mut m = DMatrix::zeros(size, size);
        for n in 0..n_int {
            m.view_mut((n * d, n * d), (d, d)).copy_from(&self.left[n]);
            m.view_mut((n * d, (n + 1) * d), (d, d)).copy_from(&self.right[n]);
        }
        m.view_mut((n_int * d, 0), (d, d)).copy_from(&self.bc_origin);
        m.view_mut((n_int * d, n_int * d), (d, d)).copy_from(&self.bc_infinity);
        m
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.size());
        let d = self.dim;
        let n_int = self.intervals();
        let mut y = vec![0.0; self.size()];
        let mut apply = |row: usize, block: &DMatrix<f64>, col: usize| {
            for i in 0..d {
                let mut s = 0.0;
                for j in 0..d {
                    s += block[(i, j)] * x[col * d + j];
                }
                y[row * d + i] += s;
            }
        };
        for n in 0..n_int {
            apply(n, &self.left[n], n);
            apply(n, &self.right[n], n + 1);
        }
        apply(n_int, &self.bc_origin, 0);
        apply(n_int, &self.bc_infinity, n_int);
        y
    }

    fn max_abs(&self) -> f64 {
        self.left
            .iter()
            .chain(self.right.iter())
            .chain([&self.bc_origin, &self.bc_infinity])
            .flat_map(|m| m.iter())
            .fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    /// Solves `J Δ = rhs`.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.size() {
            return Err(Error::DimensionMismatch {
                what: "linear right-hand side",
                expected: self.size(),
                got: rhs.len(),
            });
        }
        let d = self.dim;
        let n_int = self.intervals();
        let width = 2 * d;
        let spike_start = n_int * d;
        let threshold = SINGULAR_RTOL * self.max_abs();
        if !(threshold > 0.0) {
            return Err(Error::Singular { column: 0 });
        }

        let mut active: Vec<Row> = Vec::with_capacity(3 * d);
        let mut pivots: Vec<Row> = Vec::with_capacity(spike_start);

        for i in 0..d {
            let mut row = Row::new(width, d, rhs[spike_start + i]);
            for j in 0..d {
                row.band[j] = self.bc_origin[(i, j)];
                row.spike[j] = self.bc_infinity[(i, j)];
            }
            active.push(row);
        }

        for col in 0..spike_start {
            if col % d == 0 {
                let n = col / d;
                let last = n + 1 == n_int;
                for i in 0..d {
                    let mut row = Row::new(width, d, rhs[n * d + i]);
                    for j in 0..d {
                        row.band[j] = self.left[n][(i, j)];
                        if last {
                            row.spike[j] = self.right[n][(i, j)];
                        } else {
                            row.band[d + j] = self.right[n][(i, j)];
                        }
                    }
                    active.push(row);
                }
            }

            let (p, pmax) = active
                .iter()
                .enumerate()
                .map(|(k, r)| (k, r.band[0].abs()))
                .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(pmax > threshold) {
                return Err(Error::Singular { column: col });
            }
            let pivot = active.swap_remove(p);
            for row in active.iter_mut() {
                let factor = row.band[0] / pivot.band[0];
                if factor != 0.0 {
                    for k in 1..width {
                        row.band[k] -= factor * pivot.band[k];
                    }
                    for k in 0..d {
                        row.spike[k] -= factor * pivot.spike[k];
                    }
                    row.rhs -= factor * pivot.rhs;
                }
                row.band.copy_within(1.., 0);
                row.band[width - 1] = 0.0;
            }
            pivots.push(pivot);
        }

        debug_assert_eq!(active.len(), d);
        let mut tail = DMatrix::zeros(d, d);
        let mut tail_rhs = vec![0.0; d];
        for (i, row) in active.iter().enumerate() {
            for j in 0..d {
                tail[(i, j)] = row.spike[j];
            }
            tail_rhs[i] = row.rhs;
        }
        let y = dense_solve(tail, tail_rhs, threshold).map_err(|e| match e {
            Error::Singular { column } => Error::Singular {
                column: spike_start + column,
            },
            other => other,
        })?;

        let mut x = vec![0.0; self.size()];
        x[spike_start..].copy_from_slice(&y);
        for (col, row) in pivots.iter().enumerate().rev() {
            let mut s = row.rhs;
            let reach = width.min(spike_start - col);
            for k in 1..reach {
                s -= row.band[k] * x[col + k];
            }
            for k in 0..d {
                s -= row.spike[k] * y[k];
            }
            x[col] = s / row.band[0];
        }
        Ok(x)
    }
}

#[derive(Debug, Clone)]
struct Row {
    band: Vec<f64>,
    spike: Vec<f64>,
    rhs: f64,
}

impl Row {
    fn new(width: usize, d: usize, rhs: f64) -> Self {
        Self {
            band: vec![0.0; width],
            spike: vec![0.0; d],
            rhs,
        }
    }
}

/// Gaussian elimination with partial pivoting on a small dense system.
fn dense_solve(mut a: DMatrix<f64>, mut b: Vec<f64>, threshold: f64) -> Result<Vec<f64>> {
    let n = a.nrows();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[(i, k)].abs().total_cmp(&a[(j, k)].abs()))
            .unwrap_or(k);
        if !(a[(p, k)].abs() > threshold) {
            return Err(Error::Singular { column: k });
        }
        if p != k {
            a.swap_rows(p, k);
            b.swap(p, k);
        }
        for i in k + 1..n {
            let factor = a[(i, k)] / a[(k, k)];
            if factor != 0.0 {
                for j in k + 1..n {
                    a[(i, j)] -= factor * a[(k, j)];
                }
                b[i] -= factor * b[k];
            }
            a[(i, k)] = 0.0;
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let mut s = b[k];
        for j in k + 1..n {
            s -= a[(k, j)] * x[j];
        }
        x[k] = s / a[(k, k)];
    }
    Ok(x)
}
