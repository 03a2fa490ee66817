//! First-passage duality for diffusions with radial drift toward a sphere.
//!
//! Three independent engines compute the same objects (hitting probabilities,
//! first-passage densities and moments) and the [`duality`] harness checks
//! that the hit-time law conditioned on hitting does not depend on the sign
//! of the drift:
//!
//! * [`analytic`]: closed forms, used as oracles.
//! * [`simulate`]: Euler–Maruyama Monte Carlo of the radial SDE with an
//!   absorbing inner sphere.
//! * [`numeric`]: finite-difference boundary-value and Crank–Nicolson solvers
//!   for the backward and forward equations.
//!
//! [`cli`] turns a JSON experiment plan into CSV fields, ensembles and a JSON
//! report.

// `!(x > 0.0)` deliberately rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod cli;
pub mod duality;
pub mod model;
pub mod numeric;
pub mod quadrature;
pub mod simulate;

pub use model::{drift_at, DriftSign, GridSpec, InvalidConfig, ProcessSpec, SimConfig};
