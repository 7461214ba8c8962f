//! Quasi-uniform grids on `[0, ∞]`.
//!
//! A uniform grid `ξ_n = n/N` on `[0, 1]` is pushed through a strictly
//! increasing grid generating function `x(ξ)` with `x(1) = ∞`. The last node
//! therefore sits at infinity, while every quarter node `x((n + α)/N)` with
//! `α ∈ {1/4, 1/2, 3/4}` is finite, including those of the last interval.
//! The difference scheme only ever touches quarter nodes, so the infinite
//! node never enters any arithmetic.

use std::fmt;

use crate::error::{Error, Result};

/// Grid generating function family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MapKind {
    /// `x = -c ln(1 - ξ)`
    Logarithmic,
    /// `x = c ξ / (1 - ξ)`
    Algebraic,
}

impl fmt::Display for MapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapKind::Logarithmic => f.write_str("log"),
            MapKind::Algebraic => f.write_str("alg"),
        }
    }
}

/// A strictly monotone map from `ξ ∈ [0, 1]` onto `x ∈ [0, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridMap {
    kind: MapKind,
    c: f64,
}

impl GridMap {
    pub fn new(kind: MapKind, c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::Config(format!(
                "map control parameter must be positive and finite, got {c}"
            )));
        }
        Ok(Self { kind, c })
    }

    pub fn logarithmic(c: f64) -> Result<Self> {
        Self::new(MapKind::Logarithmic, c)
    }

    pub fn algebraic(c: f64) -> Result<Self> {
        Self::new(MapKind::Algebraic, c)
    }

    pub fn kind(&self) -> MapKind {
        self.kind
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Evaluates the map at `xi`. Returns `f64::INFINITY` at `xi = 1`.
    pub fn eval(&self, xi: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&xi) {
            return Err(Error::Domain { xi });
        }
        if xi == 1.0 {
            return Ok(f64::INFINITY);
        }
        Ok(match self.kind {
            MapKind::Logarithmic => -self.c * (-xi).ln_1p(),
            MapKind::Algebraic => self.c * xi / (1.0 - xi),
        })
    }

    /// Evaluates the map at the rational point `ξ = num/den`.
    ///
    /// `1 - ξ` is formed as `(den - num)/den` so it carries a single rounding,
    /// which keeps nodes of nested grids bitwise identical.
    pub(crate) fn eval_ratio(&self, num: u64, den: u64) -> f64 {
        debug_assert!(den > 0 && num <= den);
        if num == den {
            return f64::INFINITY;
        }
        let xi = num as f64 / den as f64;
        let one_minus = (den - num) as f64 / den as f64;
        match self.kind {
            MapKind::Logarithmic => {
                if 2 * num < den {
                    -self.c * (-xi).ln_1p()
                } else {
                    -self.c * one_minus.ln()
                }
            }
            MapKind::Algebraic => self.c * (num as f64 / (den - num) as f64),
        }
    }
}

impl Default for GridMap {
    fn default() -> Self {
        Self {
            kind: MapKind::Logarithmic,
            c: 2.0,
        }
    }
}

/// How the midpoint state `b U_{n+1} + c U_n` is weighted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum MidpointWeights {
    /// `b = (x_{n+1/2} - x_{n+1/4}) / (x_{n+3/4} - x_{n+1/4})` on every
    /// interval.
    #[default]
    QuarterNodes,
    /// `b = (x_{n+1/2} - x_n) / (x_{n+1} - x_n)` on finite intervals, quarter
    /// node weights on the last one. `a` is unchanged.
    NodeInterpolation,
}

/// Coordinates of the three interior quarter points of one interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarterNodes {
    pub quarter: f64,
    pub mid: f64,
    pub three_quarter: f64,
}

/// Per-interval coefficients of the non-standard scheme.
///
/// `a` is the step multiplying `f`, `b` and `c` are the weights of `U_{n+1}`
/// and `U_n` in the midpoint state. `b + c = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// Quasi-uniform mesh with `N` intervals and `N + 1` nodes, the last one at
/// infinity. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    map: GridMap,
    weights: MidpointWeights,
    intervals: usize,
    nodes: Vec<f64>,
    quarters: Vec<QuarterNodes>,
    coeffs: Vec<SchemeCoeffs>,
}

impl Mesh {
    pub fn new(map: GridMap, intervals: usize) -> Result<Self> {
        Self::with_weights(map, intervals, MidpointWeights::QuarterNodes)
    }

    pub fn with_weights(map: GridMap, intervals: usize, weights: MidpointWeights) -> Result<Self> {
        if intervals < 2 {
            return Err(Error::Config(format!(
                "a mesh needs at least 2 intervals, got {intervals}"
            )));
        }
        let n_big = intervals as u64;
        let nodes: Vec<f64> = (0..=n_big).map(|n| map.eval_ratio(n, n_big)).collect();

        let den = 4 * n_big;
        let quarters: Vec<QuarterNodes> = (0..n_big)
            .map(|n| QuarterNodes {
                quarter: map.eval_ratio(4 * n + 1, den),
                mid: map.eval_ratio(4 * n + 2, den),
                three_quarter: map.eval_ratio(4 * n + 3, den),
            })
            .collect();

        let coeffs = quarters
            .iter()
            .enumerate()
            .map(|(n, q)| {
                let width = q.three_quarter - q.quarter;
                let a = 2.0 * width;
                if weights == MidpointWeights::NodeInterpolation && n + 1 < intervals {
                    let span = nodes[n + 1] - nodes[n];
                    let b = (q.mid - nodes[n]) / span;
                    return SchemeCoeffs {
                        a,
                        b,
                        c: (nodes[n + 1] - q.mid) / span,
                    };
                }
                SchemeCoeffs {
                    a,
                    b: (q.mid - q.quarter) / width,
                    c: (q.three_quarter - q.mid) / width,
                }
            })
            .collect();

        Ok(Self {
            map,
            weights,
            intervals,
            nodes,
            quarters,
            coeffs,
        })
    }

    /// Mesh with `factor` times as many intervals on the same map.
    pub fn refine(&self, factor: usize) -> Result<Self> {
        if factor < 2 {
            return Err(Error::Config(format!(
                "refinement factor must be at least 2, got {factor}"
            )));
        }
        Self::with_weights(self.map, self.intervals * factor, self.weights)
    }

    pub fn map(&self) -> &GridMap {
        &self.map
    }

    pub fn weights(&self) -> MidpointWeights {
        self.weights
    }

    /// Number of intervals `N`.
    pub fn intervals(&self) -> usize {
        self.intervals
    }

    pub fn node_count(&self) -> usize {
        self.intervals + 1
    }

    /// All node coordinates; the last entry is `f64::INFINITY`.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Coordinate of a finite node. Panics on the infinity node.
    pub fn finite_node(&self, n: usize) -> f64 {
        assert!(
            n < self.intervals,
            "node {n} is the infinity sentinel and has no finite coordinate"
        );
        self.nodes[n]
    }

    pub fn xi(&self, n: usize) -> f64 {
        n as f64 / self.intervals as f64
    }

    pub fn quarter_nodes(&self) -> &[QuarterNodes] {
        &self.quarters
    }

    pub fn coeffs(&self) -> &[SchemeCoeffs] {
        &self.coeffs
    }

    /// `x_{n+1/2}` of interval `n`.
    pub fn midpoint(&self, n: usize) -> f64 {
        self.quarters[n].mid
    }

    /// Whether `fine` is a refinement of `self` by an integer factor on the
    /// same map. Returns the factor.
    pub fn refinement_factor(&self, fine: &Mesh) -> Option<usize> {
        if self.map != fine.map
            || self.weights != fine.weights
            || fine.intervals <= self.intervals
            || fine.intervals % self.intervals != 0
        {
            return None;
        }
        Some(fine.intervals / self.intervals)
    }
}
