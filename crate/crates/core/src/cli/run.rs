//! Orchestration: ensembles, fields and checks for a [`Plan`], written to disk.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use log::info;

use crate::analytic::{self, MeanRegime};
use crate::duality::{
    check_distribution_duality, check_mean_duality, check_proposition, check_theorem1_residual,
    check_theorem1_residual_profile, ks_verdict, CheckRecord, CheckResult, DualityError, DualityReport, MeanEngine,
    Verdict,
};
use crate::model::{DriftSign, ProcessSpec};
use crate::numeric::{self, Field, SigmaProfile};
use crate::simulate::{run_ensemble_with, FirstPassageEnsemble, RunOptions};

use super::config::{CheckSpec, EngineChoice, Mode, Plan};
use super::CliError;

/// Offset between the seeds of the two drift signs, so the samples are
/// independent.
pub const MIRROR_SEED_OFFSET: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, Default)]
pub struct RunSettings {
    pub out: Option<PathBuf>,
    pub seed_override: Option<u64>,
    pub threads: Option<usize>,
}

/// The plan's ensemble pair: the process as given and its mirror image.
pub struct EnsemblePair {
    pub primary: FirstPassageEnsemble,
    pub mirror: FirstPassageEnsemble,
}

impl EnsemblePair {
    pub fn outward(&self) -> &FirstPassageEnsemble {
        if self.primary.spec.is_outward() {
            &self.primary
        } else {
            &self.mirror
        }
    }

    pub fn inward(&self) -> &FirstPassageEnsemble {
        if self.primary.spec.is_outward() {
            &self.mirror
        } else {
            &self.primary
        }
    }
}

fn output_dir(plan: &Plan, settings: &RunSettings) -> PathBuf {
    settings.out.clone().unwrap_or_else(|| plan.output_dir.clone())
}

fn seed(plan: &Plan, settings: &RunSettings) -> Option<u64> {
    settings
        .seed_override
        .or_else(|| plan.simulation.as_ref().map(|s| s.seed))
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn prepare_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let mut file = fs::File::create(path).map_err(|e| io_error(path, e))?;
    file.write_all(bytes).map_err(|e| io_error(path, e))
}

fn csv_bytes(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Vec<u8> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    writer.write_record(header).expect("in-memory write");
    for row in rows {
        writer.write_record(&row).expect("in-memory write");
    }
    writer.into_inner().expect("in-memory flush")
}

pub fn ensemble_csv(ens: &FirstPassageEnsemble) -> Vec<u8> {
    csv_bytes(
        &["path_index", "outcome", "tau"],
        ens.outcomes.iter().enumerate().map(|(i, o)| {
            vec![
                i.to_string(),
                o.label().to_string(),
                o.hit_time().map(|t| t.to_string()).unwrap_or_default(),
            ]
        }),
    )
}

pub fn field_csv(field: &Field) -> Vec<u8> {
    csv_bytes(
        &["r", "value"],
        field
            .grid
            .nodes()
            .into_iter()
            .zip(&field.values)
            .map(|(r, v)| vec![r.to_string(), v.to_string()]),
    )
}

pub fn field_file_name(name: &str, field: &Field) -> String {
    let t = if field.time.is_infinite() {
        "inf".to_string()
    } else {
        field.time.to_string()
    };
    format!("field_{name}_{t}.csv")
}

fn simulate_pair(plan: &Plan, settings: &RunSettings) -> Result<EnsemblePair, CliError> {
    let sim = plan
        .simulation
        .as_ref()
        .ok_or_else(|| CliError::Config("simulation: section required".into()))?;
    let seed = seed(plan, settings).unwrap_or(sim.seed);
    let options = RunOptions {
        threads: settings.threads,
        ..RunOptions::default()
    };
    let run = |spec: &ProcessSpec, seed: u64| {
        info!("simulating {} paths, sign {}", sim.n_paths, spec.drift_sign);
        run_ensemble_with(spec, &sim.config_for(spec, seed), options).map_err(|e| CliError::Config(e.to_string()))
    };
    Ok(EnsemblePair {
        primary: run(&plan.process, seed)?,
        mirror: run(&plan.process.mirrored(), seed.wrapping_add(MIRROR_SEED_OFFSET))?,
    })
}

fn write_ensembles(dir: &Path, pair: &EnsemblePair) -> Result<(), CliError> {
    write_file(&dir.join("ensemble.csv"), &ensemble_csv(&pair.primary))?;
    write_file(&dir.join("ensemble_mirror.csv"), &ensemble_csv(&pair.mirror))
}

/// `simulate`: writes `ensemble.csv` and `ensemble_mirror.csv`.
pub fn run_simulate(plan: &Plan, settings: &RunSettings) -> Result<EnsemblePair, CliError> {
    let pair = simulate_pair(plan, settings)?;
    let dir = output_dir(plan, settings);
    prepare_dir(&dir)?;
    write_ensembles(&dir, &pair)?;
    Ok(pair)
}

/// Named fields produced by `solve`.
pub fn solve_fields(plan: &Plan) -> Result<Vec<(String, Field)>, CliError> {
    let numeric_error = |e: numeric::NumericError| CliError::Config(e.to_string());
    let plus = plan.process.with_sign(DriftSign::Outward);
    let minus = plan.process.with_sign(DriftSign::Inward);
    let grid = plan.grid;
    let mut fields = Vec::new();
    let hitting = numeric::solve_hitting_ode(&plus, &grid).map_err(numeric_error)?;
    fields.push(("hitting".to_string(), hitting.clone()));
    let finite = analytic::conditioned_mean_regime(&plus) == MeanRegime::Finite && plus.dimension <= 2;
    if finite {
        let t_plus = numeric::solve_mean_fpt_ode(&plus, &grid, true, Some(&hitting)).map_err(numeric_error)?;
        fields.push(("mean_plus_conditioned".to_string(), t_plus));
        if !analytic::is_transient(&minus) {
            let t_minus = numeric::solve_mean_fpt_ode(&minus, &grid, false, None).map_err(numeric_error)?;
            fields.push(("mean_minus".to_string(), t_minus));
        }
    }
    for (name, spec) in [("survival_plus", plus), ("survival_minus", minus)] {
        let series = numeric::survival_series(&spec, &grid).map_err(numeric_error)?;
        if let Some(last) = series.into_iter().last() {
            fields.push((name.to_string(), last));
        }
    }
    Ok(fields)
}

/// `solve`: writes one `field_<name>_<t>.csv` per solved field.
pub fn run_solve(plan: &Plan, settings: &RunSettings) -> Result<Vec<PathBuf>, CliError> {
    let fields = solve_fields(plan)?;
    let dir = output_dir(plan, settings);
    prepare_dir(&dir)?;
    let mut written = Vec::new();
    for (name, field) in &fields {
        let path = dir.join(field_file_name(name, field));
        write_file(&path, &field_csv(field))?;
        written.push(path);
    }
    Ok(written)
}

fn duality_error(e: DualityError) -> CliError {
    CliError::Check(e.to_string())
}

fn run_check(
    plan: &Plan,
    check: &CheckSpec,
    pair: Option<&EnsemblePair>,
    settings: &RunSettings,
) -> Result<CheckResult, CliError> {
    let spec = plan.process;
    let need_pair = || pair.ok_or_else(|| CliError::Config("simulation: section required".into()));
    let result = match *check {
        CheckSpec::DistributionDuality { alpha } => {
            let pair = need_pair()?;
            CheckResult::Distribution(
                check_distribution_duality(pair.outward(), pair.inward(), alpha).map_err(duality_error)?,
            )
        }
        CheckSpec::DistributionMismatch { other_strength, alpha } => {
            let pair = need_pair()?;
            let sim = plan.simulation.as_ref().expect("pair implies simulation");
            let other = ProcessSpec {
                drift_strength: other_strength,
                ..spec.with_sign(DriftSign::Inward)
            };
            let seed = seed(plan, settings)
                .unwrap_or(sim.seed)
                .wrapping_add(MIRROR_SEED_OFFSET.wrapping_mul(2));
            let options = RunOptions {
                threads: settings.threads,
                ..RunOptions::default()
            };
            let control = run_ensemble_with(&other, &sim.config_for(&other, seed), options)
                .map_err(|e| CliError::Config(e.to_string()))?;
            CheckResult::Distribution(ks_verdict(
                &pair.inward().conditioned_sample(),
                &control.conditioned_sample(),
                alpha,
            ))
        }
        CheckSpec::MeanDuality { engine } => {
            let engine = match engine {
                EngineChoice::Analytic => MeanEngine::Analytic,
                EngineChoice::Numeric => MeanEngine::Numeric(plan.grid),
                EngineChoice::Simulate => {
                    let pair = need_pair()?;
                    MeanEngine::Simulate {
                        plus: pair.outward(),
                        minus: pair.inward(),
                    }
                }
            };
            CheckResult::Mean(check_mean_duality(&spec, engine).map_err(duality_error)?)
        }
        CheckSpec::Theorem1Residual { levels } => {
            CheckResult::Theorem1(check_theorem1_residual(&spec, &plan.grid, levels).map_err(duality_error)?)
        }
        CheckSpec::Theorem1Perturbed { levels, slope } => {
            let profile = SigmaProfile::Linear {
                intercept: 0.0,
                slope: slope.unwrap_or(spec.sigma_reduced()),
            };
            CheckResult::Theorem1(
                check_theorem1_residual_profile(&spec, &plan.grid, levels, profile).map_err(duality_error)?,
            )
        }
        CheckSpec::Proposition { case, levels } => {
            let sigma = SigmaProfile::constant(spec.drift_sign.as_f64() * spec.drift_strength);
            CheckResult::Proposition(check_proposition(&spec, sigma, case, &plan.grid, levels).map_err(duality_error)?)
        }
        CheckSpec::PropositionPerturbed { case, levels, slope } => {
            let sigma = SigmaProfile::Linear { intercept: 0.0, slope };
            CheckResult::Proposition(check_proposition(&spec, sigma, case, &plan.grid, levels).map_err(duality_error)?)
        }
    };
    Ok(result)
}

/// Unique check names: the kind, suffixed with a counter when repeated.
fn check_names(checks: &[CheckSpec]) -> Vec<String> {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    checks
        .iter()
        .map(|check| {
            let kind = check.kind();
            let n = counts.entry(kind).or_insert(0);
            *n += 1;
            if *n == 1 {
                kind.to_string()
            } else {
                format!("{kind}_{n}")
            }
        })
        .collect()
}

/// Runs every requested check; ensembles are simulated only when needed.
pub fn build_report(plan: &Plan, settings: &RunSettings) -> Result<(DualityReport, Option<EnsemblePair>), CliError> {
    let pair = if plan.checks.iter().any(CheckSpec::needs_ensembles) {
        Some(simulate_pair(plan, settings)?)
    } else {
        None
    };
    let names = check_names(&plan.checks);
    let mut records = Vec::with_capacity(plan.checks.len());
    for (name, check) in names.into_iter().zip(&plan.checks) {
        info!("running check {name}");
        let result = run_check(plan, check, pair.as_ref(), settings)?;
        records.push(CheckRecord::new(name, result));
    }
    Ok((DualityReport::from_checks(records), pair))
}

pub fn report_json(report: &DualityReport) -> Vec<u8> {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    text.into_bytes()
}

/// Exit status implied by the report under `mode`.
pub fn outcome_passes(report: &DualityReport, mode: Mode) -> bool {
    match mode {
        Mode::AssertPass => report.all_pass,
        Mode::ExpectFail => report.checks.iter().all(|c| c.verdict != Verdict::Pass),
    }
}

/// `verify`: ensembles (if simulated) and `report.json`.
pub fn run_verify(plan: &Plan, settings: &RunSettings) -> Result<DualityReport, CliError> {
    let dir = output_dir(plan, settings);
    prepare_dir(&dir)?;
    let (report, pair) = build_report(plan, settings)?;
    if let Some(pair) = &pair {
        write_ensembles(&dir, pair)?;
    }
    write_file(&dir.join("report.json"), &report_json(&report))?;
    Ok(report)
}

pub fn read_report(dir: &Path) -> Result<DualityReport, CliError> {
    let path = dir.join("report.json");
    let text = fs::read_to_string(&path).map_err(|e| io_error(&path, e))?;
    serde_json::from_str(&text).map_err(|e| io_error(&path, e))
}
