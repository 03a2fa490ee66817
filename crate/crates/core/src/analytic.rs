//! Closed-form first-passage quantities.
//!
//! These serve as oracles for the Monte Carlo and finite-difference engines.
//! In one dimension the drift is a velocity `σ = sign·v` and distances are
//! measured from the target point `a`; for `d ≥ 2` the reduced strength
//! `σ = v/D` enters every exponent.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{DriftSign, ProcessSpec};
use crate::quadrature;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticError {
    #[error("{0} outside the domain")]
    Domain(&'static str),
    #[error("no closed form: {0}")]
    Unsupported(&'static str),
    #[error("transient: unconditioned mean undefined")]
    Transient,
}

/// Expected first-passage time, with divergence kept out of arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeanFpt {
    Finite(f64),
    Infinite,
}

impl MeanFpt {
    pub fn finite(self) -> Option<f64> {
        match self {
            MeanFpt::Finite(t) => Some(t),
            MeanFpt::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, MeanFpt::Infinite)
    }
}

fn require_1d(spec: &ProcessSpec) -> Result<(), AnalyticError> {
    if spec.dimension == 1 {
        Ok(())
    } else {
        Err(AnalyticError::Unsupported("one-dimensional formula"))
    }
}

/// Occupation density `u(x, t)` with absorption at the target, by images.
///
/// The image Gaussian is weighted by `exp(−σx0/D)`; with `ℓ = x − a` the
/// difference collapses to `G(ℓ − ℓ0 − σt)·(1 − exp(−ℓ·ℓ0/(Dt)))`, which is
/// exactly zero at the target and non-negative beyond it.
pub fn occupation_density_1d(spec: &ProcessSpec, x: f64, t: f64) -> Result<f64, AnalyticError> {
    require_1d(spec)?;
    if !(t > 0.0) {
        return Err(AnalyticError::Domain("time"));
    }
    let l = x - spec.target_radius;
    if !(l >= 0.0) {
        return Err(AnalyticError::Domain("position"));
    }
    let d = spec.diffusion;
    let l0 = spec.start_radius - spec.target_radius;
    let sigma = spec.drift_sign.as_f64() * spec.drift_strength;
    let spread = 4.0 * d * t;
    let shift = l - l0 - sigma * t;
    let gauss = (-(shift * shift) / spread).exp() / (std::f64::consts::PI * spread).sqrt();
    Ok(gauss * -(-l * l0 / (d * t)).exp_m1())
}

/// First-passage density `f±(x0, t) = x0/√(4πDt³)·exp(−(x0 ± |σ|t)²/4Dt)`.
pub fn fp_density_1d(spec: &ProcessSpec, t: f64) -> Result<f64, AnalyticError> {
    require_1d(spec)?;
    if !(t > 0.0) {
        return Err(AnalyticError::Domain("time"));
    }
    let d = spec.diffusion;
    let l0 = spec.start_radius - spec.target_radius;
    let shift = l0 + spec.drift_sign.as_f64() * spec.drift_strength * t;
    Ok(l0 / (4.0 * std::f64::consts::PI * d * t * t * t).sqrt() * (-(shift * shift) / (4.0 * d * t)).exp())
}

/// `H(r0)`; see [`hitting_probability_at`].
pub fn hitting_probability(spec: &ProcessSpec) -> f64 {
    hitting_probability_at(spec, spec.start_radius)
}

/// Solution of `L H = 0`, `H(a) = 1` that converts between the drift signs.
///
/// * `d = 1`: `exp(−σ(r − a))`
/// * `d = 2`: `(r/a)^{−σ}`
/// * `d > 2`: `exp[σ/(d−2)·(r^{2−d} − a^{2−d})]`
///
/// with `σ = v/D` (`σ = v/D` as well in one dimension, where `v` is the
/// velocity). Inward drift gives exactly 1. For `d ≤ 2` this is the
/// probability of ever reaching the target. For `d > 2` it stays bounded
/// away from zero at infinity; it is the factor relating the two drift
/// signs, `P₊(hit by t) = H(r)·P₋(hit by t)`, while the probability of ever
/// hitting is [`ever_hit_probability`].
pub fn hitting_probability_at(spec: &ProcessSpec, r: f64) -> f64 {
    if spec.drift_sign == DriftSign::Inward || r <= spec.target_radius {
        return 1.0;
    }
    let sigma = spec.sigma_reduced();
    let a = spec.target_radius;
    match spec.dimension {
        1 => (-sigma * (r - a)).exp(),
        2 => (r / a).powf(-sigma),
        d => {
            let k = d as i32 - 2;
            let e = sigma / k as f64 * (r.powi(-k) - a.powi(-k));
            e.exp()
        }
    }
}

/// `H₊′(r) = −σ/r^{d−1}·H₊(r)` for `d > 2`.
pub fn hitting_probability_derivative(spec: &ProcessSpec, r: f64) -> Result<f64, AnalyticError> {
    if spec.dimension <= 2 {
        return Err(AnalyticError::Unsupported(
            "derivative identity is exposed for d > 2 only",
        ));
    }
    if !(r >= spec.target_radius) {
        return Err(AnalyticError::Domain("radius"));
    }
    if spec.drift_sign == DriftSign::Inward {
        return Ok(0.0);
    }
    let sigma = spec.sigma_reduced();
    Ok(-sigma / r.powi(spec.dimension as i32 - 1) * hitting_probability_at(spec, r))
}

/// Scale function of the radial generator, up to an affine change.
///
/// `s′(r) = r^{1−d}·exp(−∫σ ρ^{1−d}dρ)` with signed `σ`; returns `±∞` where
/// the scale diverges at infinity. One-dimensional positions are measured
/// from the target.
fn scale(spec: &ProcessSpec, r: f64) -> f64 {
    let sigma = spec.signed_sigma();
    match spec.dimension {
        1 => {
            let x = r - spec.target_radius;
            if sigma == 0.0 {
                x
            } else {
                -(-sigma * x).exp() / sigma
            }
        }
        2 => {
            if sigma == 0.0 {
                r.ln()
            } else {
                -r.powf(-sigma) / sigma
            }
        }
        d => {
            let k = d as i32 - 2;
            if sigma == 0.0 {
                -r.powi(-k) / k as f64
            } else {
                -(sigma * r.powi(-k) / k as f64).exp() / sigma
            }
        }
    }
}

fn scale_at_infinity(spec: &ProcessSpec) -> f64 {
    let sigma = spec.signed_sigma();
    match spec.dimension {
        1 | 2 if sigma <= 0.0 => f64::INFINITY,
        1 | 2 => 0.0,
        _ if sigma == 0.0 => 0.0,
        _ => -1.0 / sigma,
    }
}

/// Probability of reaching the target before radius `r_outer`, from `r0`.
pub fn hit_before_exit_probability(spec: &ProcessSpec, r_outer: f64) -> f64 {
    hit_before_exit_probability_from(spec, spec.start_radius, r_outer)
}

pub fn hit_before_exit_probability_from(spec: &ProcessSpec, r: f64, r_outer: f64) -> f64 {
    let a = spec.target_radius;
    if r <= a {
        return 1.0;
    }
    if r >= r_outer {
        return 0.0;
    }
    let s_outer = if r_outer.is_infinite() {
        scale_at_infinity(spec)
    } else {
        scale(spec, r_outer)
    };
    if s_outer.is_infinite() {
        return 1.0;
    }
    let p = (s_outer - scale(spec, r)) / (s_outer - scale(spec, a));
    p.clamp(0.0, 1.0)
}

/// Probability of ever reaching the target from `r0`.
pub fn ever_hit_probability(spec: &ProcessSpec) -> f64 {
    ever_hit_probability_from(spec, spec.start_radius)
}

pub fn ever_hit_probability_from(spec: &ProcessSpec, r: f64) -> f64 {
    hit_before_exit_probability_from(spec, r, f64::INFINITY)
}

/// Whether some paths never reach the target.
pub fn is_transient(spec: &ProcessSpec) -> bool {
    scale_at_infinity(spec).is_finite()
}

/// Finiteness of the mean hit time conditioned on hitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeanRegime {
    Finite,
    Infinite,
}

/// Regime of the conditioned mean, which is the same for both drift signs.
///
/// `d = 1` needs `v > 0`, `d = 2` needs `v > 2D`; for `d > 2` the conditioned
/// hit-time law has a `t^{−d/2}` tail, so the mean is finite only for `d ≥ 5`.
pub fn conditioned_mean_regime(spec: &ProcessSpec) -> MeanRegime {
    let finite = match spec.dimension {
        1 => spec.drift_strength > 0.0,
        2 => spec.drift_strength > 2.0 * spec.diffusion,
        d => d >= 5,
    };
    if finite {
        MeanRegime::Finite
    } else {
        MeanRegime::Infinite
    }
}

/// Mean first-passage time from `r0`.
pub fn mean_fpt(spec: &ProcessSpec, conditioned: bool) -> Result<MeanFpt, AnalyticError> {
    mean_fpt_at(spec, spec.start_radius, conditioned)
}

/// Mean first-passage time from radius `r`.
///
/// `d = 1`: `(r − a)/v`. `d = 2`: `(r² − a²)/(2(v − 2D))` for `v > 2D`,
/// otherwise infinite. Outward drift conditioned on hitting gives the same
/// value as inward drift; unconditioned outward drift is an error.
/// `d = 3, 4` are always infinite; `d ≥ 5` is not covered.
pub fn mean_fpt_at(spec: &ProcessSpec, r: f64, conditioned: bool) -> Result<MeanFpt, AnalyticError> {
    if !(r >= spec.target_radius) {
        return Err(AnalyticError::Domain("radius"));
    }
    if spec.is_outward() && !conditioned && is_transient(spec) {
        return Err(AnalyticError::Transient);
    }
    if conditioned_mean_regime(spec) == MeanRegime::Infinite {
        return Ok(MeanFpt::Infinite);
    }
    if spec.dimension > 2 {
        return Err(AnalyticError::Unsupported("finite mean first-passage time for d > 4"));
    }
    let a = spec.target_radius;
    let v = spec.drift_strength;
    let t = match spec.dimension {
        1 => (r - a) / v,
        _ => (r * r - a * a) / (2.0 * (v - 2.0 * spec.diffusion)),
    };
    Ok(MeanFpt::Finite(t))
}

/// `u0(x) = exp[σ(x − x_ref)/D]` for constant coefficients, so `u0(x_ref) = 1`.
pub fn u0_factor(diffusion: f64, sigma: f64, x_ref: f64, x: f64) -> f64 {
    (sigma * (x - x_ref) / diffusion).exp()
}

/// `u0(x) = exp[∫_{x_ref}^x (σ − D′)/D]` for coefficient profiles.
pub fn u0_factor_general<S, D, Dp>(sigma: S, diffusion: D, diffusion_prime: Dp, x_ref: f64, x: f64) -> f64
where
    S: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
    Dp: Fn(f64) -> f64,
{
    let integrand = |y: f64| (sigma(y) - diffusion_prime(y)) / diffusion(y);
    let exponent = if x >= x_ref {
        quadrature::integrate(integrand, x_ref, x, 1e-12)
    } else {
        -quadrature::integrate(integrand, x, x_ref, 1e-12)
    };
    exponent.exp()
}
