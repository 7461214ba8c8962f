use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A grid map was evaluated outside its reference interval `[0, 1]`.
    #[error("reference coordinate {xi} lies outside [0, 1]")]
    Domain { xi: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    /// `f` or `g` produced a NaN or infinite entry. `index` is the interval
    /// for `f` and `None` for the boundary function.
    #[error("non-finite {what} evaluation (interval {index:?})")]
    Evaluation {
        what: &'static str,
        index: Option<usize>,
    },

    #[error("singular linear system (pivot column {column})")]
    Singular { column: usize },

    #[error("linear solve failed at Newton iteration {iteration}: {source}")]
    LinearSolve {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("Newton iteration diverged at iteration {iteration} (mean update {update_norm:e})")]
    Divergence { iteration: usize, update_norm: f64 },

    #[error("no convergence on refinement level {level} (last mean update {update_norm:e})")]
    NotConverged { level: usize, update_norm: f64 },

    #[error("usage error: {0}")]
    Usage(String),
}
