//! MHD boundary layer over a flat plate:
//!
//! ```text
//! u''' + u u'' + β (1 - u') = 0,   u(0) = u'(0) = 0,   u'(∞) = 1
//! ```
//!
//! written as the first-order system `(u, u', u'')`. `β = 0` is Blasius.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::newton::SolutionGrid;
use crate::problem::{BvpSystem, InitialGuess};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MhdProblem {
    beta: f64,
}

impl MhdProblem {
    pub fn new(beta: f64) -> Result<Self> {
        if !beta.is_finite() {
            return Err(Error::Config(format!("magnetic parameter must be finite, got {beta}")));
        }
        Ok(Self { beta })
    }

    pub fn blasius() -> Self {
        Self { beta: 0.0 }
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// MHD system for magnetic parameter `beta`.
pub fn mhd_system(beta: f64) -> Result<MhdProblem> {
    MhdProblem::new(beta)
}

impl BvpSystem for MhdProblem {
    fn dim(&self) -> usize {
        3
    }

    fn rhs(&self, _x: f64, u: &[f64]) -> Vec<f64> {
        vec![u[1], u[2], -u[0] * u[2] - self.beta * (1.0 - u[1])]
    }

    fn boundary(&self, u0: &[f64], u_inf: &[f64]) -> Vec<f64> {
        vec![u0[0], u0[1], u_inf[1] - 1.0]
    }

    fn rhs_jacobian(&self, _x: f64, u: &[f64]) -> Option<DMatrix<f64>> {
        #[rustfmt::skip]
        let j = DMatrix::from_row_slice(3, 3, &[
            0.0, 1.0, 0.0,
            0.0, 0.0, 1.0,
            -u[2], self.beta, -u[0],
        ]);
        Some(j)
    }

    fn boundary_jacobian(&self, _u0: &[f64], _u_inf: &[f64]) -> Option<(DMatrix<f64>, DMatrix<f64>)> {
        #[rustfmt::skip]
        let origin = DMatrix::from_row_slice(3, 3, &[
            1.0, 0.0, 0.0,
            0.0, 1.0, 0.0,
            0.0, 0.0, 0.0,
        ]);
        #[rustfmt::skip]
        let infinity = DMatrix::from_row_slice(3, 3, &[
            0.0, 0.0, 0.0,
            0.0, 0.0, 0.0,
            0.0, 1.0, 0.0,
        ]);
        Some((origin, infinity))
    }
}

/// Starting profile `(x/2, 1, e^{-x})`.
///
/// The first component is unbounded, so the infinity node takes the value
/// extrapolated one half step `a_{N-1/2}` past `x_{N-1}`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MhdInitialGuess;

pub fn mhd_initial_guess() -> MhdInitialGuess {
    MhdInitialGuess
}

impl InitialGuess for MhdInitialGuess {
    fn at(&self, x: f64) -> Vec<f64> {
        vec![0.5 * x, 1.0, (-x).exp()]
    }

    fn at_infinity(&self, mesh: &Mesh) -> Vec<f64> {
        let n = mesh.intervals();
        let last = mesh.coeffs()[n - 1];
        vec![0.5 * mesh.finite_node(n - 1) + 0.5 * last.a, 1.0, 0.0]
    }
}

/// Wall shear stress `u''(0)`, the third component at the origin.
pub fn wall_shear(sol: &SolutionGrid) -> Result<f64> {
    if sol.dim() != 3 {
        return Err(Error::Usage(format!(
            "wall shear needs a 3-component MHD solution, got dimension {}",
            sol.dim()
        )));
    }
    Ok(sol.states.get(0, 2))
}
