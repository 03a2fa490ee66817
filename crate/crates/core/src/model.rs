//! Process, Monte Carlo and grid configuration shared by every engine.
//!
//! A [`ProcessSpec`] describes a particle diffusing in `d` dimensions with a
//! radial drift of strength `v` toward (inward) or away from (outward) the
//! origin, started at radius `r0` outside an absorbing sphere of radius `a`.
//! In one dimension the drift is a constant velocity and the "sphere" is the
//! point `a` on the half line.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Direction of the radial drift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum DriftSign {
    /// Away from the target (`+1`).
    Outward,
    /// Toward the target (`-1`).
    Inward,
}

impl DriftSign {
    pub fn as_f64(self) -> f64 {
        match self {
            DriftSign::Outward => 1.0,
            DriftSign::Inward => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            DriftSign::Outward => DriftSign::Inward,
            DriftSign::Inward => DriftSign::Outward,
        }
    }
}

impl TryFrom<i8> for DriftSign {
    type Error = String;

    fn try_from(value: i8) -> Result<Self, Self::Error> {
        match value {
            1 => Ok(DriftSign::Outward),
            -1 => Ok(DriftSign::Inward),
            other => Err(format!("drift_sign must be +1 or -1, got {other}")),
        }
    }
}

impl From<DriftSign> for i8 {
    fn from(sign: DriftSign) -> i8 {
        match sign {
            DriftSign::Outward => 1,
            DriftSign::Inward => -1,
        }
    }
}

impl fmt::Display for DriftSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DriftSign::Outward => f.write_str("+1"),
            DriftSign::Inward => f.write_str("-1"),
        }
    }
}

/// One violated invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Every invariant a configuration violates, in field order.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct InvalidConfig {
    pub violations: Vec<Violation>,
}

impl InvalidConfig {
    pub fn fields(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.violations.iter().map(|v| v.field)
    }
}

impl fmt::Display for InvalidConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Default)]
struct Violations(Vec<Violation>);

impl Violations {
    fn check(&mut self, ok: bool, field: &'static str, message: impl Into<String>) {
        if !ok {
            self.0.push(Violation {
                field,
                message: message.into(),
            });
        }
    }

    fn finish(self) -> Result<(), InvalidConfig> {
        if self.0.is_empty() {
            Ok(())
        } else {
            Err(InvalidConfig { violations: self.0 })
        }
    }
}

/// A radius outside the domain of the radial operators.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("radius {rho} outside the domain (target radius {target_radius})")]
pub struct DomainError {
    pub rho: f64,
    pub target_radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessSpec {
    #[serde(rename = "d")]
    pub dimension: u32,
    pub diffusion: f64,
    pub drift_strength: f64,
    pub drift_sign: DriftSign,
    pub target_radius: f64,
    pub start_radius: f64,
}

impl ProcessSpec {
    /// Canonical one-dimensional setup: target at the origin.
    pub fn one_dimensional(diffusion: f64, velocity: f64, sign: DriftSign, x0: f64) -> Self {
        ProcessSpec {
            dimension: 1,
            diffusion,
            drift_strength: velocity,
            drift_sign: sign,
            target_radius: 0.0,
            start_radius: x0,
        }
    }

    pub fn radial(
        dimension: u32,
        diffusion: f64,
        drift_strength: f64,
        sign: DriftSign,
        target_radius: f64,
        start_radius: f64,
    ) -> Self {
        ProcessSpec {
            dimension,
            diffusion,
            drift_strength,
            drift_sign: sign,
            target_radius,
            start_radius,
        }
    }

    /// Returns the spec back if every invariant holds, otherwise all violations.
    pub fn validate(self) -> Result<Self, InvalidConfig> {
        let mut v = Violations::default();
        let finite = [
            self.diffusion,
            self.drift_strength,
            self.target_radius,
            self.start_radius,
        ]
        .iter()
        .all(|x| x.is_finite());
        v.check(finite, "process", "all numeric fields must be finite");
        v.check(self.dimension >= 1, "d", "dimension must be >= 1");
        v.check(self.diffusion > 0.0, "diffusion", "D > 0 required");
        v.check(
            self.drift_strength >= 0.0,
            "drift_strength",
            "v >= 0 required (direction is carried by drift_sign)",
        );
        v.check(self.target_radius >= 0.0, "target_radius", "a >= 0 required");
        v.check(
            self.dimension < 2 || self.target_radius > 0.0,
            "target_radius",
            "a>0 required for d>=2",
        );
        v.check(
            self.start_radius > self.target_radius,
            "start_radius",
            "r0 > a required",
        );
        v.finish()?;
        Ok(self)
    }

    /// σ = v/D, the drift strength in units of the diffusion coefficient.
    pub fn sigma_reduced(&self) -> f64 {
        self.drift_strength / self.diffusion
    }

    /// σ = sign·v/D.
    pub fn signed_sigma(&self) -> f64 {
        self.drift_sign.as_f64() * self.sigma_reduced()
    }

    /// Same process with the drift reversed.
    pub fn mirrored(&self) -> Self {
        ProcessSpec {
            drift_sign: self.drift_sign.flipped(),
            ..*self
        }
    }

    pub fn with_sign(&self, sign: DriftSign) -> Self {
        ProcessSpec {
            drift_sign: sign,
            ..*self
        }
    }

    /// Same process started elsewhere.
    pub fn started_at(&self, r: f64) -> Self {
        ProcessSpec {
            start_radius: r,
            ..*self
        }
    }

    pub fn is_outward(&self) -> bool {
        self.drift_sign == DriftSign::Outward
    }
}

/// Radial drift of the generator,
/// `b(ρ) = D·(d−1)/ρ + sign·v/ρ^{d−1}` (constant `sign·v` when `d = 1`).
pub fn drift_at(spec: &ProcessSpec, rho: f64) -> Result<f64, DomainError> {
    let err = DomainError {
        rho,
        target_radius: spec.target_radius,
    };
    if !(rho >= spec.target_radius) {
        return Err(err);
    }
    let signed_v = spec.drift_sign.as_f64() * spec.drift_strength;
    if spec.dimension == 1 {
        return Ok(signed_v);
    }
    if rho <= 0.0 {
        return Err(err);
    }
    let dm1 = (spec.dimension - 1) as f64;
    Ok(spec.diffusion * dm1 / rho + signed_v / rho.powi(spec.dimension as i32 - 1))
}

/// Monte Carlo controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub n_paths: u64,
    pub dt: f64,
    pub t_max: f64,
    pub r_escape: f64,
    pub seed: u64,
    #[serde(default = "default_bridge")]
    pub bridge_correction: bool,
}

fn default_bridge() -> bool {
    true
}

impl SimConfig {
    /// Structural invariants only; see [`crate::simulate::check_censoring_bound`]
    /// for the spec-dependent escape bound.
    pub fn validate(self, spec: &ProcessSpec) -> Result<Self, InvalidConfig> {
        let mut v = Violations::default();
        v.check(self.n_paths >= 1, "n_paths", "at least one path required");
        v.check(self.dt > 0.0 && self.dt.is_finite(), "dt", "time step must be positive");
        v.check(
            self.t_max > 0.0 && self.t_max.is_finite(),
            "t_max",
            "censoring horizon must be positive",
        );
        v.check(self.dt < self.t_max, "dt", "dt < t_max required");
        v.check(self.r_escape > spec.start_radius, "r_escape", "r_escape > r0 required");
        v.finish()?;
        Ok(self)
    }

    pub fn steps(&self) -> u64 {
        (self.t_max / self.dt * (1.0 + 1e-12)).floor() as u64
    }
}

/// Finite-difference discretization on the uniform radial grid `[a, r_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub r_max: f64,
    pub n_cells: usize,
    pub dt: f64,
    pub t_end: f64,
}

impl GridSpec {
    pub const MIN_CELLS: usize = 16;

    pub fn validate(self, spec: &ProcessSpec) -> Result<Self, InvalidConfig> {
        let mut v = Violations::default();
        v.check(
            self.r_max > spec.start_radius && self.r_max.is_finite(),
            "r_max",
            "r_max > r0 required",
        );
        v.check(
            self.n_cells >= Self::MIN_CELLS,
            "n_cells",
            format!("at least {} cells required", Self::MIN_CELLS),
        );
        v.check(
            self.dt > 0.0 && self.dt.is_finite(),
            "dt",
            "PDE time step must be positive",
        );
        v.check(
            self.t_end > 0.0 && self.t_end.is_finite(),
            "t_end",
            "final time must be positive",
        );
        v.finish()?;
        Ok(self)
    }

    pub fn spacing(&self, target_radius: f64) -> f64 {
        (self.r_max - target_radius) / self.n_cells as f64
    }

    /// Same domain with half the spacing and half the time step.
    pub fn refined(&self) -> Self {
        GridSpec {
            n_cells: self.n_cells * 2,
            dt: self.dt / 2.0,
            ..*self
        }
    }

    /// `levels` successively refined copies, starting with `self`.
    pub fn refinement_ladder(&self, levels: usize) -> Vec<GridSpec> {
        std::iter::successors(Some(*self), |g| Some(g.refined()))
            .take(levels)
            .collect()
    }
}
