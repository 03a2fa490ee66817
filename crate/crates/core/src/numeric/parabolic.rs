//! Crank–Nicolson time stepping of `u_t = L* u` and `S_t = L S`.
//!
//! Boundary rows of the operator are zero, so Dirichlet values are carried
//! over from the input field unchanged.

use log::warn;
use serde::Serialize;

use super::operator::{operator_matrix, Generator, OperatorKind, TridiagonalOperator};
use super::tridiag::TridiagonalLu;
use super::{Field, NumericError, RadialGrid};
use crate::model::{GridSpec, ProcessSpec};

/// Factored `I − (dt/2)A`, shared by Crank–Nicolson steps of size `dt` and
/// implicit-Euler steps of size `dt/2`.
#[derive(Debug, Clone)]
pub struct ThetaEvolution {
    grid: RadialGrid,
    dt: f64,
    operator: TridiagonalOperator,
    implicit: TridiagonalLu,
}

impl ThetaEvolution {
    pub fn new(generator: &Generator, grid: RadialGrid, kind: OperatorKind, dt: f64) -> Result<Self, NumericError> {
        let operator = operator_matrix(generator, &grid, kind);
        let half = 0.5 * dt;
        let lower: Vec<f64> = operator.lower.iter().map(|x| -half * x).collect();
        let upper: Vec<f64> = operator.upper.iter().map(|x| -half * x).collect();
        let diag: Vec<f64> = operator.diag.iter().map(|x| 1.0 - half * x).collect();
        let implicit = TridiagonalLu::factor(&lower, &diag, &upper)?;
        Ok(ThetaEvolution {
            grid,
            dt,
            operator,
            implicit,
        })
    }

    pub fn for_spec(spec: &ProcessSpec, grid: &GridSpec, kind: OperatorKind) -> Result<Self, NumericError> {
        let spec = spec.validate()?;
        let grid = grid.validate(&spec)?;
        let radial = RadialGrid::from_spec(&spec, &grid);
        warn_accuracy(&radial, grid.dt);
        ThetaEvolution::new(&Generator::from_spec(&spec), radial, kind, grid.dt)
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// One Crank–Nicolson step of size `dt`.
    pub fn crank_nicolson(&self, values: &[f64]) -> Vec<f64> {
        let applied = self.operator.apply(values);
        let rhs: Vec<f64> = values
            .iter()
            .zip(&applied)
            .map(|(v, a)| v + 0.5 * self.dt * a)
            .collect();
        self.implicit.solve(&rhs)
    }

    /// One implicit-Euler step of size `dt/2`.
    pub fn implicit_half_step(&self, values: &[f64]) -> Vec<f64> {
        self.implicit.solve(values)
    }

    /// All time levels `0, dt, …, steps·dt`, damping the start-up with four
    /// implicit half-steps in place of the first two Crank–Nicolson steps.
    pub fn evolve(&self, initial: &Field, steps: usize) -> Result<Vec<Field>, NumericError> {
        initial.check_grid(&self.grid)?;
        let mut levels = Vec::with_capacity(steps + 1);
        levels.push(initial.clone());
        let mut current = initial.values.clone();
        for k in 1..=steps {
            current = if k <= 2 {
                let mid = self.implicit_half_step(&current);
                self.implicit_half_step(&mid)
            } else {
                self.crank_nicolson(&current)
            };
            levels.push(Field::new(
                self.grid,
                current.clone(),
                initial.time + k as f64 * self.dt,
            ));
        }
        Ok(levels)
    }
}

fn warn_accuracy(grid: &RadialGrid, dt: f64) {
    let h = grid.spacing();
    if dt > h {
        warn!("time step {dt} exceeds grid spacing {h}: time error dominates the O(h²) spatial error");
    }
}

fn single_step(spec: &ProcessSpec, grid: &GridSpec, field: &Field, kind: OperatorKind) -> Result<Field, NumericError> {
    let evolution = ThetaEvolution::for_spec(spec, grid, kind)?;
    field.check_grid(evolution.grid())?;
    let values = evolution.crank_nicolson(&field.values);
    Ok(Field::new(*evolution.grid(), values, field.time + grid.dt))
}

/// One Crank–Nicolson step of the forward equation for the occupation density.
pub fn step_forward(spec: &ProcessSpec, grid: &GridSpec, u: &Field) -> Result<Field, NumericError> {
    single_step(spec, grid, u, OperatorKind::Forward)
}

/// One Crank–Nicolson step of the backward equation for the survival probability.
pub fn step_backward(spec: &ProcessSpec, grid: &GridSpec, s: &Field) -> Result<Field, NumericError> {
    single_step(spec, grid, s, OperatorKind::Backward)
}

/// `S(·, 0)`: 0 on the target, 1 elsewhere.
pub fn survival_initial(spec: &ProcessSpec, grid: &GridSpec) -> Field {
    let radial = RadialGrid::from_spec(spec, grid);
    let mut values = vec![1.0; radial.len()];
    values[0] = 0.0;
    Field::new(radial, values, 0.0)
}

/// Survival fields at `0, dt, …` up to `t_end`.
pub fn survival_series(spec: &ProcessSpec, grid: &GridSpec) -> Result<Vec<Field>, NumericError> {
    let evolution = ThetaEvolution::for_spec(spec, grid, OperatorKind::Backward)?;
    let steps = (grid.t_end / grid.dt * (1.0 + 1e-12)).floor() as usize;
    evolution.evolve(&survival_initial(spec, grid), steps)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensitySample {
    pub time: f64,
    pub density: f64,
}

/// `f(r0, t_k) = −∂S/∂t` by three-point differences (one-sided at the ends).
pub fn first_passage_density_from_survival(series: &[Field], r0: f64) -> Result<Vec<DensitySample>, NumericError> {
    if series.len() < 3 {
        return Err(NumericError::InsufficientData {
            needed: 3,
            got: series.len(),
        });
    }
    let grid = series[0].grid;
    let mut times = Vec::with_capacity(series.len());
    let mut values = Vec::with_capacity(series.len());
    for field in series {
        field.check_grid(&grid)?;
        times.push(field.time);
        values.push(
            field
                .value_at(r0)
                .ok_or(NumericError::Unsupported("r0 outside the grid"))?,
        );
    }
    let n = times.len();
    let samples = (0..n)
        .map(|k| {
            let j = k.clamp(1, n - 2);
            let derivative = three_point_derivative(
                [times[j - 1], times[j], times[j + 1]],
                [values[j - 1], values[j], values[j + 1]],
                times[k],
            );
            DensitySample {
                time: times[k],
                density: -derivative,
            }
        })
        .collect();
    Ok(samples)
}

/// Derivative at `x` of the quadratic through three points.
fn three_point_derivative(t: [f64; 3], y: [f64; 3], x: f64) -> f64 {
    let [t0, t1, t2] = t;
    let l0 = ((x - t1) + (x - t2)) / ((t0 - t1) * (t0 - t2));
    let l1 = ((x - t0) + (x - t2)) / ((t1 - t0) * (t1 - t2));
    let l2 = ((x - t0) + (x - t1)) / ((t2 - t0) * (t2 - t1));
    y[0] * l0 + y[1] * l1 + y[2] * l2
}
