//! Mesh-doubling continuation and Richardson extrapolation.

use crate::error::{Error, Result};
use crate::mesh::{GridMap, Mesh};
use crate::newton::{newton_solve, NewtonConfig, SolutionGrid};
use crate::problem::{BvpSystem, InitialGuess, StateMatrix};

/// Prolongs a coarse solution onto a nested finer mesh by linear
/// interpolation in the reference coordinate `ξ`.
///
/// Shared nodes are copied exactly, so node `N` (infinity) is carried over
/// unchanged.
pub fn interpolate_to_refined(coarse: &SolutionGrid, fine_mesh: &Mesh) -> Result<StateMatrix> {
    let factor = coarse.mesh.refinement_factor(fine_mesh).ok_or_else(|| {
        Error::Config(format!(
            "mesh with {} intervals is not a refinement of the mesh with {} intervals",
            fine_mesh.intervals(),
            coarse.mesh.intervals()
        ))
    })?;
    let d = coarse.dim();
    let mut out = StateMatrix::zeros(fine_mesh.node_count(), d);
    for j in 0..fine_mesh.node_count() {
        let (k, offset) = (j / factor, j % factor);
        let row = out.row_mut(j);
        if offset == 0 {
            row.copy_from_slice(coarse.states.row(k));
        } else {
            let t = offset as f64 / factor as f64;
            let (lo, hi) = (coarse.states.row(k), coarse.states.row(k + 1));
            for l in 0..d {
                row[l] = (1.0 - t) * lo[l] + t * hi[l];
            }
        }
    }
    Ok(out)
}

/// Solves on `n0, 2 n0, …, 2^levels n0` intervals, seeding each level with
/// the interpolated solution of the previous one.
pub fn continuation_solve<S, G>(
    sys: &S,
    map: GridMap,
    n0: usize,
    levels: usize,
    guess: &G,
    cfg: &NewtonConfig,
) -> Result<Vec<SolutionGrid>>
where
    S: BvpSystem + ?Sized,
    G: InitialGuess + ?Sized,
{
    continuation_solve_from(sys, Mesh::new(map, n0)?, levels, guess, cfg)
}

/// [`continuation_solve`] starting from an explicit coarsest mesh.
pub fn continuation_solve_from<S, G>(
    sys: &S,
    coarsest: Mesh,
    levels: usize,
    guess: &G,
    cfg: &NewtonConfig,
) -> Result<Vec<SolutionGrid>>
where
    S: BvpSystem + ?Sized,
    G: InitialGuess + ?Sized,
{
    let mut mesh = coarsest;
    let mut out: Vec<SolutionGrid> = Vec::with_capacity(levels + 1);
    for level in 0..=levels {
        if level > 0 {
            mesh = mesh.refine(2)?;
        }
        let start = match out.last() {
            Some(prev) => interpolate_to_refined(prev, &mesh)?,
            None => guess.sample(&mesh)?,
        };
        let sol = newton_solve(sys, &mesh, start, cfg)?;
        if !sol.converged {
            return Err(Error::NotConverged {
                level,
                update_norm: sol.final_update_norm,
            });
        }
        out.push(sol);
    }
    Ok(out)
}

/// Default exponents `p_k = 2 (k + 1)` for an even-power error expansion.
pub fn default_orders(levels: usize) -> Vec<f64> {
    (0..levels).map(|k| 2.0 * (k as f64 + 1.0)).collect()
}

/// Triangular table of Richardson extrapolants of a scalar functional.
///
/// `values[g][k]` is the level-`k` extrapolant on grid `g`, defined for
/// `k <= g`. Column `0` holds the raw values.
#[derive(Debug, Clone, PartialEq)]
pub struct RichardsonLadder {
    pub grid_sizes: Vec<usize>,
    pub values: Vec<Vec<f64>>,
    pub orders: Vec<f64>,
}

impl RichardsonLadder {
    pub fn raw(&self) -> Vec<f64> {
        self.values.iter().map(|row| row[0]).collect()
    }

    /// Highest-level extrapolant on the finest grid.
    pub fn benchmark(&self) -> f64 {
        *self.values.last().and_then(|row| row.last()).expect("empty ladder")
    }

    pub fn get(&self, grid: usize, level: usize) -> Option<f64> {
        self.values.get(grid).and_then(|row| row.get(level)).copied()
    }
}

/// Fills the Richardson triangle for refinement ratio 2:
/// `U_{g+1,k+1} = U_{g+1,k} + (U_{g+1,k} - U_{g,k}) / (2^{p_k} - 1)`.
pub fn extrapolate(raw: &[f64], orders: &[f64]) -> Result<RichardsonLadder> {
    extrapolate_with_sizes(raw, orders, Vec::new())
}

pub fn extrapolate_with_sizes(raw: &[f64], orders: &[f64], grid_sizes: Vec<usize>) -> Result<RichardsonLadder> {
    if raw.is_empty() {
        return Err(Error::Config("extrapolation needs at least one value".into()));
    }
    if orders.len() + 1 < raw.len() {
        return Err(Error::Config(format!(
            "{} values need {} extrapolation orders, got {}",
            raw.len(),
            raw.len() - 1,
            orders.len()
        )));
    }
    if !grid_sizes.is_empty() && grid_sizes.len() != raw.len() {
        return Err(Error::DimensionMismatch {
            what: "grid sizes",
            expected: raw.len(),
            got: grid_sizes.len(),
        });
    }
    let mut values: Vec<Vec<f64>> = Vec::with_capacity(raw.len());
    for (g, &v) in raw.iter().enumerate() {
        let mut row = vec![v];
        for k in 0..g {
            let fine = row[k];
            let coarse = values[g - 1][k];
            row.push(fine + (fine - coarse) / (2f64.powf(orders[k]) - 1.0));
        }
        values.push(row);
    }
    Ok(RichardsonLadder {
        grid_sizes,
        values,
        orders: orders[..raw.len() - 1].to_vec(),
    })
}

/// Observed convergence order `log2((v0 - v1) / (v1 - v2))` from three
/// consecutive doublings. `None` when a difference vanishes.
pub fn observed_order(raw: [f64; 3]) -> Option<f64> {
    let (d1, d2) = (raw[0] - raw[1], raw[1] - raw[2]);
    if d1 == 0.0 || d2 == 0.0 {
        return None;
    }
    let ratio = d1 / d2;
    if !(ratio > 0.0) || !ratio.is_finite() {
        return None;
    }
    Some(ratio.log2())
}
