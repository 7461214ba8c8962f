//! Boundary value problems on the half line `[0, ∞)` solved with a
//! non-standard finite difference scheme on quasi-uniform grids.
//!
//! The grid is the image of a uniform grid on `[0, 1]` under a logarithmic or
//! algebraic map, so its last node lies at infinity and the condition there is
//! imposed exactly. The discrete system is solved by Newton's method with a
//! bordered block elimination; accuracy is improved by mesh doubling with
//! continuation and Richardson extrapolation.
//!
//! # Modules
//!
//! - [`mesh`]: grid maps, quasi-uniform meshes, scheme coefficients
//! - [`problem`]: the [`BvpSystem`] abstraction and Jacobian helpers
//! - [`newton`]: residual, block Jacobian, linear solver, Newton iteration
//! - [`refine`]: continuation over refined meshes and Richardson ladders
//! - [`models`]: the MHD boundary-layer problem
//!
//! # Example
//!
//! ```
//! use nsfd::{mesh::{GridMap, Mesh}, models, newton, problem::InitialGuess};
//!
//! let mesh = Mesh::new(GridMap::logarithmic(2.0)?, 200)?;
//! let sys = models::mhd_system(1.0)?;
//! let guess = models::mhd_initial_guess().sample(&mesh)?;
//! let sol = newton::newton_solve(&sys, &mesh, guess, &newton::NewtonConfig::default())?;
//! assert!(sol.converged);
//! assert!((models::wall_shear(&sol)? - 1.09).abs() < 1e-3);
//! # Ok::<(), nsfd::Error>(())
//! ```

pub mod error;
pub mod mesh;
pub mod models;
pub mod newton;
pub mod problem;
pub mod refine;

pub use error::{Error, Result};
pub use mesh::{GridMap, MapKind, Mesh, MidpointWeights};
pub use newton::{newton_solve, NewtonConfig, SolutionGrid};
pub use problem::{BvpSystem, FnSystem, InitialGuess, StateMatrix};
pub use refine::{continuation_solve, extrapolate, observed_order, RichardsonLadder};
