//! Experiment plan: strict JSON in, validated [`Plan`] out.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analytic;
use crate::duality::PropositionCase;
use crate::model::{GridSpec, InvalidConfig, ProcessSpec, SimConfig};
use crate::simulate::{check_censoring_bound, default_escape_radius};

use super::CliError;

pub const DEFAULT_ALPHA: f64 = 0.01;
pub const DEFAULT_LEVELS: usize = 3;
pub const DEFAULT_CELLS: usize = 400;
pub const DEFAULT_GRID_DT: f64 = 0.01;
pub const DEFAULT_T_END: f64 = 1.0;
pub const DEFAULT_OUTPUT_DIR: &str = "out";

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanFile {
    process: ProcessSpec,
    #[serde(default)]
    simulation: Option<SimulationFile>,
    #[serde(default)]
    grid: Option<GridFile>,
    #[serde(default)]
    checks: Vec<CheckSpec>,
    #[serde(default)]
    mode: Mode,
    #[serde(default)]
    output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulationFile {
    n_paths: u64,
    dt: f64,
    t_max: f64,
    #[serde(default)]
    r_escape: Option<f64>,
    seed: u64,
    #[serde(default = "yes")]
    bridge_correction: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFile {
    r_max: Option<f64>,
    n_cells: Option<usize>,
    dt: Option<f64>,
    t_end: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Every check must pass (infinite-mean verdicts count as passing).
    #[default]
    AssertPass,
    /// Negative controls: no check may pass.
    ExpectFail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineChoice {
    Analytic,
    Numeric,
    Simulate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckSpec {
    /// KS test on the conditioned samples of both drift signs.
    DistributionDuality {
        #[serde(default = "alpha")]
        alpha: f64,
    },
    /// KS test between two inward ensembles with different `|v|`.
    DistributionMismatch {
        other_strength: f64,
        #[serde(default = "alpha")]
        alpha: f64,
    },
    MeanDuality {
        engine: EngineChoice,
    },
    Theorem1Residual {
        #[serde(default = "levels")]
        levels: usize,
    },
    /// Outward drift profile `σ(r) = slope·r` in place of the constant.
    Theorem1Perturbed {
        #[serde(default = "levels")]
        levels: usize,
        #[serde(default)]
        slope: Option<f64>,
    },
    Proposition {
        case: PropositionCase,
        #[serde(default = "levels")]
        levels: usize,
    },
    /// Drift velocity `σ(x) = slope·x`.
    PropositionPerturbed {
        case: PropositionCase,
        #[serde(default = "levels")]
        levels: usize,
        #[serde(default = "unit_slope")]
        slope: f64,
    },
}

fn alpha() -> f64 {
    DEFAULT_ALPHA
}

fn levels() -> usize {
    DEFAULT_LEVELS
}

fn unit_slope() -> f64 {
    1.0
}

impl CheckSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            CheckSpec::DistributionDuality { .. } => "distribution_duality",
            CheckSpec::DistributionMismatch { .. } => "distribution_mismatch",
            CheckSpec::MeanDuality { .. } => "mean_duality",
            CheckSpec::Theorem1Residual { .. } => "theorem1_residual",
            CheckSpec::Theorem1Perturbed { .. } => "theorem1_perturbed",
            CheckSpec::Proposition { .. } => "proposition",
            CheckSpec::PropositionPerturbed { .. } => "proposition_perturbed",
        }
    }

    pub fn needs_ensembles(&self) -> bool {
        matches!(
            self,
            CheckSpec::DistributionDuality { .. }
                | CheckSpec::DistributionMismatch { .. }
                | CheckSpec::MeanDuality {
                    engine: EngineChoice::Simulate
                }
        )
    }

    fn is_one_dimensional_only(&self) -> bool {
        matches!(
            self,
            CheckSpec::Proposition { .. } | CheckSpec::PropositionPerturbed { .. }
        )
    }
}

/// Monte Carlo settings with the escape radius left to be resolved per spec.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Simulation {
    pub n_paths: u64,
    pub dt: f64,
    pub t_max: f64,
    pub r_escape: Option<f64>,
    pub seed: u64,
    pub bridge_correction: bool,
}

impl Simulation {
    /// Concrete configuration for `spec`, with the default escape radius
    /// when none was given.
    pub fn config_for(&self, spec: &ProcessSpec, seed: u64) -> SimConfig {
        SimConfig {
            n_paths: self.n_paths,
            dt: self.dt,
            t_max: self.t_max,
            r_escape: self
                .r_escape
                .unwrap_or_else(|| default_escape_radius(spec, self.n_paths)),
            seed,
            bridge_correction: self.bridge_correction,
        }
    }
}

/// A validated experiment plan with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Plan {
    pub process: ProcessSpec,
    pub simulation: Option<Simulation>,
    pub grid: GridSpec,
    pub checks: Vec<CheckSpec>,
    pub mode: Mode,
    pub output_dir: PathBuf,
}

fn config_error(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn invalid(field: &'static str, message: impl Into<String>) -> CliError {
    config_error(InvalidConfig {
        violations: vec![crate::model::Violation {
            field,
            message: message.into(),
        }],
    })
}

pub fn parse_config(path: &Path) -> Result<Plan, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_plan(&text)
}

pub fn parse_plan(text: &str) -> Result<Plan, CliError> {
    let file: PlanFile = serde_json::from_str(text).map_err(config_error)?;
    let process = file.process.validate().map_err(config_error)?;
    let g = file.grid.unwrap_or_default();
    let grid = GridSpec {
        r_max: g.r_max.unwrap_or(10.0 * process.start_radius.max(1.0)),
        n_cells: g.n_cells.unwrap_or(DEFAULT_CELLS),
        dt: g.dt.unwrap_or(DEFAULT_GRID_DT),
        t_end: g.t_end.unwrap_or(DEFAULT_T_END),
    }
    .validate(&process)
    .map_err(config_error)?;

    let simulation = file.simulation.map(|s| Simulation {
        n_paths: s.n_paths,
        dt: s.dt,
        t_max: s.t_max,
        r_escape: s.r_escape,
        seed: s.seed,
        bridge_correction: s.bridge_correction,
    });
    if let Some(sim) = &simulation {
        for spec in [process, process.mirrored()] {
            let config = sim.config_for(&spec, sim.seed).validate(&spec).map_err(config_error)?;
            check_censoring_bound(&spec, &config).map_err(config_error)?;
        }
    }

    for check in &file.checks {
        validate_check(check, &process, simulation.is_some())?;
    }

    Ok(Plan {
        process,
        simulation,
        grid,
        checks: file.checks,
        mode: file.mode,
        output_dir: file.output_dir.unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
    })
}

fn validate_check(check: &CheckSpec, process: &ProcessSpec, has_simulation: bool) -> Result<(), CliError> {
    if check.needs_ensembles() && !has_simulation {
        return Err(invalid("simulation", format!("required by the {} check", check.kind())));
    }
    if check.is_one_dimensional_only() && process.dimension != 1 {
        return Err(invalid("d", format!("the {} check needs d = 1", check.kind())));
    }
    match *check {
        CheckSpec::DistributionDuality { alpha } | CheckSpec::DistributionMismatch { alpha, .. }
            if !(alpha > 0.0 && alpha < 1.0) =>
        {
            Err(invalid("alpha", "significance level must lie in (0, 1)"))
        }
        CheckSpec::DistributionMismatch { other_strength, .. }
            if !(other_strength >= 0.0 && other_strength.is_finite()) =>
        {
            Err(invalid(
                "other_strength",
                "drift strength must be finite and non-negative",
            ))
        }
        CheckSpec::Theorem1Residual { levels }
        | CheckSpec::Theorem1Perturbed { levels, .. }
        | CheckSpec::Proposition { levels, .. }
        | CheckSpec::PropositionPerturbed { levels, .. }
            if !(2..=8).contains(&levels) =>
        {
            Err(invalid("levels", "between 2 and 8 refinement levels required"))
        }
        CheckSpec::MeanDuality {
            engine: EngineChoice::Analytic | EngineChoice::Numeric,
        } if process.dimension > 2 && analytic::conditioned_mean_regime(process) == analytic::MeanRegime::Finite => {
            Err(invalid(
                "engine",
                "no closed form or solver for the conditioned mean when d > 4",
            ))
        }
        _ => Ok(()),
    }
}
