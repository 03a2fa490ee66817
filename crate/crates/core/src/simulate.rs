//! Monte Carlo first-passage ensembles for the radial SDE
//! `dρ = b(ρ)dt + √(2D)dW`, absorbed at `ρ ≤ a`.
//!
//! Each path draws from its own ChaCha8 stream keyed by `(seed, path index)`,
//! so an ensemble is a pure function of its inputs no matter how the paths
//! are scheduled across workers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytic;
use crate::model::{InvalidConfig, ProcessSpec, SimConfig, Violation};

/// Bridge crossing probabilities below `exp(-BRIDGE_CUTOFF)` are not sampled.
const BRIDGE_CUTOFF: f64 = 50.0;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Invalid(#[from] InvalidConfig),
    #[error("no conditioning possible: no path hit the target (hit fraction {hit_fraction})")]
    NoHits { hit_fraction: f64 },
    #[error("worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum PathOutcome {
    Hit { tau: f64 },
    CensoredTime,
    CensoredEscape,
}

impl PathOutcome {
    pub fn hit_time(&self) -> Option<f64> {
        match *self {
            PathOutcome::Hit { tau } => Some(tau),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            PathOutcome::Hit { .. } => "hit",
            PathOutcome::CensoredTime => "censored_time",
            PathOutcome::CensoredEscape => "censored_escape",
        }
    }
}

/// Identifies the random stream of one path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathKey {
    pub seed: u64,
    pub index: u64,
}

impl PathKey {
    fn rng(self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.index);
        rng
    }
}

#[derive(Debug, Clone, Copy)]
struct RadialDrift {
    dim: i32,
    curvature: f64,
    signed_v: f64,
}

impl RadialDrift {
    fn new(spec: &ProcessSpec) -> Self {
        RadialDrift {
            dim: spec.dimension as i32,
            curvature: spec.diffusion * (spec.dimension as f64 - 1.0),
            signed_v: spec.drift_sign.as_f64() * spec.drift_strength,
        }
    }

    #[inline]
    fn at(&self, rho: f64) -> f64 {
        match self.dim {
            1 => self.signed_v,
            2 => (self.curvature + self.signed_v) / rho,
            3 => (self.curvature + self.signed_v / rho) / rho,
            d => self.curvature / rho + self.signed_v / rho.powi(d - 1),
        }
    }
}

/// Euler–Maruyama path of the radial process.
///
/// A hit is recorded at the midpoint of the step in which it is detected,
/// either because the step lands at or below `a` or, with bridge correction,
/// because a Brownian bridge between two points above `a` would have crossed
/// (probability `exp(−(ρ_k − a)(ρ_{k+1} − a)/(D·dt))`).
pub fn simulate_path(spec: &ProcessSpec, config: &SimConfig, key: PathKey) -> PathOutcome {
    let mut rng = key.rng();
    let drift = RadialDrift::new(spec);
    let a = spec.target_radius;
    let dt = config.dt;
    let noise = (2.0 * spec.diffusion * dt).sqrt();
    let inv_ddt = 1.0 / (spec.diffusion * dt);
    let mut rho = spec.start_radius;
    for k in 0..config.steps() {
        let z: f64 = StandardNormal.sample(&mut rng);
        let next = rho + drift.at(rho) * dt + noise * z;
        let hit = next <= a || (config.bridge_correction && bridge_crossed(&mut rng, rho - a, next - a, inv_ddt));
        if hit {
            return PathOutcome::Hit {
                tau: (k as f64 + 0.5) * dt,
            };
        }
        if next > config.r_escape {
            return PathOutcome::CensoredEscape;
        }
        rho = next;
    }
    PathOutcome::CensoredTime
}

#[inline]
fn bridge_crossed(rng: &mut ChaCha8Rng, gap0: f64, gap1: f64, inv_ddt: f64) -> bool {
    let exponent = gap0 * gap1 * inv_ddt;
    if exponent >= BRIDGE_CUTOFF {
        return false;
    }
    let u: f64 = rng.random();
    u < (-exponent).exp()
}

/// Euler–Maruyama in Euclidean coordinates, started on the first axis.
///
/// Cross-check for the radial reduction; much slower, use with small
/// ensembles. No bridge correction is applied.
pub fn simulate_path_euclidean(spec: &ProcessSpec, config: &SimConfig, key: PathKey) -> PathOutcome {
    if spec.dimension == 1 {
        let plain = SimConfig {
            bridge_correction: false,
            ..*config
        };
        return simulate_path(spec, &plain, key);
    }
    let mut rng = key.rng();
    let d = spec.dimension as usize;
    let dt = config.dt;
    let noise = (2.0 * spec.diffusion * dt).sqrt();
    let signed_v = spec.drift_sign.as_f64() * spec.drift_strength;
    let a2 = spec.target_radius * spec.target_radius;
    let esc2 = config.r_escape * config.r_escape;
    let mut x = vec![0.0; d];
    x[0] = spec.start_radius;
    let mut r2: f64 = x.iter().map(|c| c * c).sum();
    for k in 0..config.steps() {
        // v·x/|x|^d
        let scale = signed_v / r2.sqrt().powi(d as i32) * dt;
        for c in x.iter_mut() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *c += scale * *c + noise * z;
        }
        r2 = x.iter().map(|c| c * c).sum();
        if r2 <= a2 {
            return PathOutcome::Hit {
                tau: (k as f64 + 0.5) * dt,
            };
        }
        if r2 > esc2 {
            return PathOutcome::CensoredEscape;
        }
    }
    PathOutcome::CensoredTime
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirstPassageEnsemble {
    pub spec: ProcessSpec,
    pub config: SimConfig,
    pub outcomes: Vec<PathOutcome>,
}

impl FirstPassageEnsemble {
    pub fn n_paths(&self) -> usize {
        self.outcomes.len()
    }

    pub fn n_hits(&self) -> usize {
        self.outcomes.iter().filter(|o| o.hit_time().is_some()).count()
    }

    pub fn hit_fraction(&self) -> f64 {
        if self.outcomes.is_empty() {
            return 0.0;
        }
        self.n_hits() as f64 / self.n_paths() as f64
    }

    /// Sorted hit times: the sample conditioned on reaching the target.
    pub fn conditioned_sample(&self) -> Vec<f64> {
        let mut times: Vec<f64> = self.outcomes.iter().filter_map(PathOutcome::hit_time).collect();
        times.sort_by(f64::total_cmp);
        times
    }
}

/// Options that do not change the ensemble's content.
#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    /// Worker threads; `None` uses the ambient rayon pool.
    pub threads: Option<usize>,
    /// Reject escape radii whose return probability exceeds the bias budget.
    pub enforce_censoring_bound: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            threads: None,
            enforce_censoring_bound: true,
        }
    }
}

/// Statistical error of the hit fraction used as the censoring budget.
fn target_se(spec: &ProcessSpec, n_paths: u64) -> f64 {
    let h = analytic::ever_hit_probability(spec);
    (h * (1.0 - h) / n_paths as f64).sqrt()
}

/// Requires `P(return from r_escape) < 0.1·SE` for transient processes.
pub fn check_censoring_bound(spec: &ProcessSpec, config: &SimConfig) -> Result<(), InvalidConfig> {
    if !analytic::is_transient(spec) {
        return Ok(());
    }
    let budget = 0.1 * target_se(spec, config.n_paths);
    let back = analytic::ever_hit_probability_from(spec, config.r_escape);
    if back < budget {
        Ok(())
    } else {
        Err(InvalidConfig {
            violations: vec![Violation {
                field: "r_escape",
                message: format!("return probability {back:.3e} from r_escape must be below 0.1*SE = {budget:.3e}"),
            }],
        })
    }
}

/// Smallest radius from which the target is reached with probability below
/// `min(1e-4, 0.1·SE)`; `10·r0` when every path eventually hits.
pub fn default_escape_radius(spec: &ProcessSpec, n_paths: u64) -> f64 {
    if !analytic::is_transient(spec) {
        return 10.0 * spec.start_radius;
    }
    let threshold = 1e-4f64.min(0.1 * target_se(spec, n_paths));
    let back = |r: f64| analytic::ever_hit_probability_from(spec, r);
    let mut lo = spec.start_radius;
    let mut hi = 2.0 * spec.start_radius.max(1.0);
    while back(hi) >= threshold {
        lo = hi;
        hi *= 2.0;
    }
    // `hi` always satisfies the threshold.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if back(mid) < threshold {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

pub fn run_ensemble(spec: &ProcessSpec, config: &SimConfig) -> Result<FirstPassageEnsemble, SimError> {
    run_ensemble_with(spec, config, RunOptions::default())
}

/// Simulates `n_paths` independent paths; path `i` uses stream `(seed, i)`.
pub fn run_ensemble_with(
    spec: &ProcessSpec,
    config: &SimConfig,
    options: RunOptions,
) -> Result<FirstPassageEnsemble, SimError> {
    let spec = spec.validate()?;
    let config = config.validate(&spec)?;
    if options.enforce_censoring_bound {
        check_censoring_bound(&spec, &config)?;
    }
    let simulate_all = || -> Vec<PathOutcome> {
        (0..config.n_paths)
            .into_par_iter()
            .map(|index| {
                simulate_path(
                    &spec,
                    &config,
                    PathKey {
                        seed: config.seed,
                        index,
                    },
                )
            })
            .collect()
    };
    let outcomes = match options.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| SimError::Pool(e.to_string()))?
            .install(simulate_all),
        None => simulate_all(),
    };
    Ok(FirstPassageEnsemble { spec, config, outcomes })
}

/// Right-continuous empirical distribution function.
#[derive(Debug, Clone, PartialEq)]
pub struct Ecdf {
    sorted: Vec<f64>,
}

impl Ecdf {
    pub fn new(mut samples: Vec<f64>) -> Self {
        samples.sort_by(f64::total_cmp);
        Ecdf { sorted: samples }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }

    pub fn eval(&self, x: f64) -> f64 {
        if self.sorted.is_empty() {
            return 0.0;
        }
        let below = self.sorted.partition_point(|&s| s <= x);
        below as f64 / self.sorted.len() as f64
    }

    /// Dvoretzky–Kiefer–Wolfowitz band half-width at confidence `1 − alpha`.
    pub fn dkw_halfwidth(&self, alpha: f64) -> f64 {
        ((2.0 / alpha).ln() / (2.0 * self.sorted.len() as f64)).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionedStats {
    pub n_paths: usize,
    pub n_hits: usize,
    pub hit_fraction: f64,
    pub hit_fraction_se: f64,
    pub conditioned_mean: f64,
    pub conditioned_mean_se: f64,
    pub ecdf: Ecdf,
    /// 95% DKW half-width of `ecdf`.
    pub ecdf_halfwidth: f64,
}

pub fn conditioned_statistics(ens: &FirstPassageEnsemble) -> Result<ConditionedStats, SimError> {
    let times = ens.conditioned_sample();
    let n_paths = ens.n_paths();
    let n_hits = times.len();
    let p = ens.hit_fraction();
    if n_hits == 0 {
        return Err(SimError::NoHits { hit_fraction: p });
    }
    let mean = times.iter().sum::<f64>() / n_hits as f64;
    let var = if n_hits > 1 {
        times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n_hits - 1) as f64
    } else {
        0.0
    };
    let ecdf = Ecdf::new(times);
    let ecdf_halfwidth = ecdf.dkw_halfwidth(0.05);
    Ok(ConditionedStats {
        n_paths,
        n_hits,
        hit_fraction: p,
        hit_fraction_se: (p * (1.0 - p) / n_paths as f64).sqrt(),
        conditioned_mean: mean,
        conditioned_mean_se: (var / n_hits as f64).sqrt(),
        ecdf,
        ecdf_halfwidth,
    })
}
