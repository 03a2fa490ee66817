//! Finite-difference solvers on a uniform radial grid `a = r_0 < … < r_n = r_max`.
//!
//! * [`bvp`]: elliptic problems for the hitting probability and mean
//!   first-passage time.
//! * [`parabolic`]: Crank–Nicolson stepping of the forward (density) and
//!   backward (survival) equations.
//! * [`operator`]: the discrete generator and its adjoint.

pub mod bvp;
pub mod operator;
pub mod parabolic;
pub mod tridiag;

use thiserror::Error;

use crate::model::{GridSpec, InvalidConfig, ProcessSpec};

pub use bvp::{mean_fpt_outer_sensitivity, solve_hitting_ode, solve_hitting_profile, solve_mean_fpt_ode};
pub use operator::{operator_apply, operator_matrix, Generator, OperatorKind, SigmaProfile, TridiagonalOperator};
pub use parabolic::{
    first_passage_density_from_survival, step_backward, step_forward, survival_initial, survival_series, DensitySample,
    ThetaEvolution,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericError {
    #[error("invalid configuration: {0}")]
    Invalid(#[from] InvalidConfig),
    #[error("discretization error: {0}")]
    Singular(#[from] tridiag::SingularSystem),
    #[error("transient: unconditioned mean undefined")]
    Transient,
    #[error("conditioned mean is infinite for this drift")]
    InfiniteMean,
    #[error("conditioned solve needs the hitting-probability field")]
    MissingHitting,
    #[error("field has {got} nodes, grid has {expected}")]
    GridMismatch { expected: usize, got: usize },
    #[error("insufficient data: {got} time levels, at least {needed} required")]
    InsufficientData { needed: usize, got: usize },
    #[error("unsupported: {0}")]
    Unsupported(&'static str),
}

/// Uniform grid on `[start, end]` with `cells` intervals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialGrid {
    pub start: f64,
    pub end: f64,
    pub cells: usize,
}

impl RadialGrid {
    pub fn new(start: f64, end: f64, cells: usize) -> Self {
        RadialGrid { start, end, cells }
    }

    pub fn from_spec(spec: &ProcessSpec, grid: &GridSpec) -> Self {
        RadialGrid::new(spec.target_radius, grid.r_max, grid.n_cells)
    }

    pub fn spacing(&self) -> f64 {
        (self.end - self.start) / self.cells as f64
    }

    pub fn len(&self) -> usize {
        self.cells + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.cells {
            self.end
        } else {
            self.start + i as f64 * self.spacing()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.node(i)).collect()
    }
}

/// Grid samples of a radial function at one time.
///
/// Time-independent solutions carry `time = ∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub grid: RadialGrid,
    pub values: Vec<f64>,
    pub time: f64,
}

impl Field {
    pub fn new(grid: RadialGrid, values: Vec<f64>, time: f64) -> Self {
        debug_assert_eq!(grid.len(), values.len());
        Field { grid, values, time }
    }

    pub fn from_fn(grid: RadialGrid, time: f64, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().into_iter().map(f).collect();
        Field { grid, values, time }
    }

    pub fn stationary(grid: RadialGrid, values: Vec<f64>) -> Self {
        Field::new(grid, values, f64::INFINITY)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Piecewise-linear interpolation; `None` outside the grid.
    pub fn value_at(&self, r: f64) -> Option<f64> {
        let g = &self.grid;
        if !(r >= g.start && r <= g.end) {
            return None;
        }
        let pos = (r - g.start) / g.spacing();
        let i = (pos.floor() as usize).min(g.cells - 1);
        let w = pos - i as f64;
        Some((1.0 - w) * self.values[i] + w * self.values[i + 1])
    }

    /// Largest `|value − f(r)|` over the nodes.
    pub fn max_error(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.grid
            .nodes()
            .iter()
            .zip(&self.values)
            .map(|(&r, &v)| (v - f(r)).abs())
            .fold(0.0, f64::max)
    }

    /// Trapezoid `∫ value·ρ^{d−1} dρ`.
    pub fn radial_mass(&self, dimension: u32) -> f64 {
        let h = self.grid.spacing();
        let n = self.values.len();
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let w = if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
                w * v * self.grid.node(i).powi(dimension as i32 - 1)
            })
            .sum::<f64>()
            * h
    }

    pub(crate) fn check_grid(&self, grid: &RadialGrid) -> Result<(), NumericError> {
        if self.values.len() != grid.len() {
            return Err(NumericError::GridMismatch {
                expected: grid.len(),
                got: self.values.len(),
            });
        }
        Ok(())
    }
}
