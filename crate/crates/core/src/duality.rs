//! Verification harness: does the hit-time law conditioned on hitting forget
//! the sign of the drift, and do the operator identities behind it hold on
//! the grid?

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytic::{self, AnalyticError, MeanFpt, MeanRegime};
use crate::model::{DriftSign, GridSpec, ProcessSpec};
use crate::numeric::Field;
use crate::numeric::{
    operator_matrix, solve_hitting_ode, solve_hitting_profile, solve_mean_fpt_ode, Generator, NumericError,
    OperatorKind, RadialGrid, SigmaProfile, ThetaEvolution,
};
use crate::simulate::{conditioned_statistics, FirstPassageEnsemble, SimError};

/// Minimum conditioned sample size per ensemble for the KS check.
pub const MIN_HITS: usize = 100;
/// Equivalence margin for mean comparisons, in uncertainty units.
pub const MEAN_MARGIN: f64 = 3.0;
/// Accepted error-reduction factors per halving of `h` (second order).
pub const RATIO_BAND: (f64, f64) = (3.5, 4.5);
/// Residuals below this count as exactly zero.
pub const EXACT_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum DualityError {
    #[error("ensembles are not a drift-sign pair: {0}")]
    Mismatch(String),
    #[error("insufficient sample: {got} hits, at least {needed} required")]
    InsufficientSample { needed: usize, got: usize },
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error(transparent)]
    Simulation(#[from] SimError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// The compared quantity is infinite; not a failure.
    InfiniteRegime,
}

impl Verdict {
    fn from_pass(pass: bool) -> Self {
        if pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn is_acceptable(self) -> bool {
        self != Verdict::Fail
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::InfiniteRegime => "INF-REGIME",
        })
    }
}

// ---------------------------------------------------------------- KS

/// Two-sample Kolmogorov–Smirnov statistic `sup |F_a − F_b|`.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return if a.is_empty() && b.is_empty() { 0.0 } else { 1.0 };
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Asymptotic critical value `c(α)·√((n+m)/(nm))`, `c(α) = √(−ln(α/2)/2)`.
pub fn ks_critical(alpha: f64, n: usize, m: usize) -> f64 {
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    let (n, m) = (n as f64, m as f64);
    c * ((n + m) / (n * m)).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub ks_statistic: f64,
    pub ks_critical: f64,
    pub alpha: f64,
    pub n_first: usize,
    pub n_second: usize,
    pub verdict: Verdict,
}

/// KS comparison of two samples without any precondition on their origin.
pub fn ks_verdict(a: &[f64], b: &[f64], alpha: f64) -> KsResult {
    let statistic = ks_statistic(a, b);
    let critical = ks_critical(alpha, a.len().max(1), b.len().max(1));
    KsResult {
        ks_statistic: statistic,
        ks_critical: critical,
        alpha,
        n_first: a.len(),
        n_second: b.len(),
        verdict: Verdict::from_pass(statistic < critical),
    }
}

fn same_magnitudes(x: &ProcessSpec, y: &ProcessSpec) -> Result<(), DualityError> {
    let pairs = [
        ("d", x.dimension as f64, y.dimension as f64),
        ("D", x.diffusion, y.diffusion),
        ("|v|", x.drift_strength, y.drift_strength),
        ("a", x.target_radius, y.target_radius),
        ("r0", x.start_radius, y.start_radius),
    ];
    for (name, p, q) in pairs {
        if p != q {
            return Err(DualityError::Mismatch(format!("{name} differs ({p} vs {q})")));
        }
    }
    Ok(())
}

/// KS test of the conditioned hit-time samples of a `±` ensemble pair.
pub fn check_distribution_duality(
    plus: &FirstPassageEnsemble,
    minus: &FirstPassageEnsemble,
    alpha: f64,
) -> Result<KsResult, DualityError> {
    same_magnitudes(&plus.spec, &minus.spec)?;
    for ens in [plus, minus] {
        let hits = ens.n_hits();
        if hits < MIN_HITS {
            return Err(DualityError::InsufficientSample {
                needed: MIN_HITS,
                got: hits,
            });
        }
    }
    Ok(ks_verdict(
        &plus.conditioned_sample(),
        &minus.conditioned_sample(),
        alpha,
    ))
}

// ---------------------------------------------------------------- means

#[derive(Debug, Clone, Copy)]
pub enum MeanEngine<'a> {
    Analytic,
    Numeric(GridSpec),
    Simulate {
        plus: &'a FirstPassageEnsemble,
        minus: &'a FirstPassageEnsemble,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineKind {
    Analytic,
    Numeric,
    Simulate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanComparison {
    pub engine: EngineKind,
    /// Outward drift, conditioned on hitting.
    pub mean_plus_conditioned: Option<f64>,
    /// Inward drift (conditioned on hitting where that is not certain).
    pub mean_minus: Option<f64>,
    /// Standard error or grid-error estimate of the difference.
    pub uncertainty: Option<f64>,
    pub mean_diff_se_units: Option<f64>,
    pub margin: f64,
    pub verdict: Verdict,
}

impl MeanComparison {
    fn infinite(engine: EngineKind) -> Self {
        MeanComparison {
            engine,
            mean_plus_conditioned: None,
            mean_minus: None,
            uncertainty: None,
            mean_diff_se_units: None,
            margin: MEAN_MARGIN,
            verdict: Verdict::InfiniteRegime,
        }
    }

    fn finite(engine: EngineKind, plus: f64, minus: f64, unit: f64) -> Self {
        let units = (plus - minus).abs() / unit;
        MeanComparison {
            engine,
            mean_plus_conditioned: Some(plus),
            mean_minus: Some(minus),
            uncertainty: Some(unit),
            mean_diff_se_units: Some(units),
            margin: MEAN_MARGIN,
            verdict: Verdict::from_pass(units < MEAN_MARGIN),
        }
    }
}

fn numeric_mean_at_r0(spec: &ProcessSpec, grid: &GridSpec) -> Result<f64, DualityError> {
    let conditioned = spec.is_outward();
    let h = if conditioned {
        Some(solve_hitting_ode(spec, grid)?)
    } else {
        None
    };
    let t = solve_mean_fpt_ode(spec, grid, conditioned, h.as_ref())?;
    t.value_at(spec.start_radius)
        .ok_or(DualityError::Numeric(NumericError::Unsupported("r0 outside the grid")))
}

/// Compares the conditioned mean for outward drift with the mean for inward
/// drift, using one engine. The sign of `spec` is ignored.
pub fn check_mean_duality(spec: &ProcessSpec, engine: MeanEngine<'_>) -> Result<MeanComparison, DualityError> {
    let plus = spec.with_sign(DriftSign::Outward);
    let minus = spec.with_sign(DriftSign::Inward);
    let kind = match engine {
        MeanEngine::Analytic => EngineKind::Analytic,
        MeanEngine::Numeric(_) => EngineKind::Numeric,
        MeanEngine::Simulate { .. } => EngineKind::Simulate,
    };
    if analytic::conditioned_mean_regime(&plus) == MeanRegime::Infinite {
        return Ok(MeanComparison::infinite(kind));
    }
    match engine {
        MeanEngine::Analytic => {
            let tp = analytic::mean_fpt(&plus, true)?;
            let tm = analytic::mean_fpt(&minus, true)?;
            match (tp, tm) {
                (MeanFpt::Finite(p), MeanFpt::Finite(m)) => {
                    Ok(MeanComparison::finite(kind, p, m, 1e-12 * p.abs().max(1.0)))
                }
                _ => Ok(MeanComparison::infinite(kind)),
            }
        }
        MeanEngine::Numeric(grid) => {
            let fine = grid.refined();
            let (p, pf) = (numeric_mean_at_r0(&plus, &grid)?, numeric_mean_at_r0(&plus, &fine)?);
            let (m, mf) = (numeric_mean_at_r0(&minus, &grid)?, numeric_mean_at_r0(&minus, &fine)?);
            // Richardson estimate of the error left on the finer grid
            let err = ((pf - p).powi(2) + (mf - m).powi(2)).sqrt() / 3.0;
            let unit = err.max(1e-9 * pf.abs().max(1.0));
            Ok(MeanComparison::finite(kind, pf, mf, unit))
        }
        MeanEngine::Simulate { plus: ep, minus: em } => {
            same_magnitudes(&ep.spec, &em.spec)?;
            let sp = conditioned_statistics(ep)?;
            let sm = conditioned_statistics(em)?;
            let unit = (sp.conditioned_mean_se.powi(2) + sm.conditioned_mean_se.powi(2)).sqrt();
            Ok(MeanComparison::finite(
                kind,
                sp.conditioned_mean,
                sm.conditioned_mean,
                unit,
            ))
        }
    }
}

// ---------------------------------------------------------------- residuals

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualLevel {
    pub n_cells: usize,
    pub h: f64,
    pub dt: f64,
    pub residual: f64,
}

/// Max-norm residuals over a refinement ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualStudy {
    pub levels: Vec<ResidualLevel>,
    /// `residual[k] / residual[k+1]`.
    pub ratios: Vec<f64>,
    pub ratio_band: (f64, f64),
    pub exact_tol: f64,
    pub verdict: Verdict,
}

impl ResidualStudy {
    /// Pass when the finest residual is zero to round-off or every
    /// reduction factor lies in the second-order band.
    fn from_levels(levels: Vec<ResidualLevel>) -> Self {
        let ratios: Vec<f64> = levels.windows(2).map(|w| w[0].residual / w[1].residual).collect();
        let finest = levels.last().map_or(f64::INFINITY, |l| l.residual);
        let exact = finest < EXACT_TOL;
        let converging = !ratios.is_empty() && ratios.iter().all(|r| (RATIO_BAND.0..=RATIO_BAND.1).contains(r));
        ResidualStudy {
            levels,
            ratios,
            ratio_band: RATIO_BAND,
            exact_tol: EXACT_TOL,
            verdict: Verdict::from_pass(exact || converging),
        }
    }

    pub fn norms(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.residual).collect()
    }

    pub fn finest(&self) -> f64 {
        self.levels.last().map_or(f64::NAN, |l| l.residual)
    }
}

fn interior_max(values: impl Iterator<Item = f64>, n: usize) -> f64 {
    values
        .enumerate()
        .filter(|(i, _)| *i > 0 && *i + 1 < n)
        .fold(0.0, |m, (_, v)| m.max(v.abs()))
}

/// Number of steps to just past `t_end`, and the level that sits at `t_end`.
fn evaluation_levels(grid: &GridSpec) -> (usize, usize) {
    let k = (grid.t_end / grid.dt).round().max(1.0) as usize;
    (k + 1, k)
}

/// `max |L₊(S₋K) − δt(S₋K)|` over interior nodes at `t_end`, where `S₋` is
/// the survival field of the drift-reversed generator and `K` solves
/// `L₊K = 0`, `K(a) = 1` with the conversion factor as far value.
fn theorem1_level(plus: &Generator, spec: &ProcessSpec, grid: &GridSpec) -> Result<ResidualLevel, DualityError> {
    let radial = RadialGrid::from_spec(spec, grid);
    let k_field = solve_hitting_profile(plus, &radial, plus.conversion_factor(radial.start, radial.end))?;
    let minus = plus.mirrored();
    let evolution = ThetaEvolution::new(&minus, radial, OperatorKind::Backward, grid.dt)?;
    let mut s0 = vec![1.0; radial.len()];
    s0[0] = 0.0;
    let (steps, k) = evaluation_levels(grid);
    let levels = evolution.evolve(&Field::new(radial, s0, 0.0), steps)?;
    let product = |f: &Field| -> Vec<f64> { f.values.iter().zip(&k_field.values).map(|(s, k)| s * k).collect() };
    let l_plus = operator_matrix(plus, &radial, OperatorKind::Backward);
    let p_prev = product(&levels[k - 1]);
    let p_now = product(&levels[k]);
    let p_next = product(&levels[k + 1]);
    let applied = l_plus.apply(&p_now);
    let n = radial.len();
    let residual = interior_max(
        (0..n).map(|i| applied[i] - (p_next[i] - p_prev[i]) / (2.0 * grid.dt)),
        n,
    );
    Ok(ResidualLevel {
        n_cells: grid.n_cells,
        h: radial.spacing(),
        dt: grid.dt,
        residual,
    })
}

/// Grid-refinement study of the identity `L₊(S₋H₊) = ∂t(S₋H₊)`.
///
/// `spec` supplies `d`, `D`, `|v|`, `a`; `levels` successive halvings of
/// `h` and `dt` start from `base`.
pub fn check_theorem1_residual(
    spec: &ProcessSpec,
    base: &GridSpec,
    levels: usize,
) -> Result<ResidualStudy, DualityError> {
    let plus = Generator::from_spec(&spec.with_sign(DriftSign::Outward));
    check_theorem1_residual_profile(spec, base, levels, plus.sigma)
}

/// As [`check_theorem1_residual`] with an arbitrary outward drift profile.
/// A non-constant profile breaks the identity.
pub fn check_theorem1_residual_profile(
    spec: &ProcessSpec,
    base: &GridSpec,
    levels: usize,
    sigma: SigmaProfile,
) -> Result<ResidualStudy, DualityError> {
    let spec = spec.validate().map_err(NumericError::from)?;
    let base = base.validate(&spec).map_err(NumericError::from)?;
    let plus = Generator {
        dimension: spec.dimension,
        diffusion: spec.diffusion,
        sigma,
    };
    let levels = base
        .refinement_ladder(levels)
        .iter()
        .map(|g| theorem1_level(&plus, &spec, g))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ResidualStudy::from_levels(levels))
}

/// Which solution of `v_t = D v″ + σ v′` the proposition is tested on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropositionCase {
    /// `v ≡ 1`
    Unit,
    /// The survival field `S(x, t)` of the same equation, at `t_end`.
    Survival,
}

/// `u0 = exp(∫_a^x σ/D)` with its first two derivatives.
fn u0_with_derivatives(sigma: &SigmaProfile, diffusion: f64, a: f64, x: f64) -> (f64, f64, f64) {
    let exponent = match *sigma {
        SigmaProfile::Constant { sigma } => sigma * (x - a),
        SigmaProfile::Linear { intercept, slope } => intercept * (x - a) + 0.5 * slope * (x * x - a * a),
    } / diffusion;
    let u0 = exponent.exp();
    let s = sigma.value(x);
    let d1 = s / diffusion * u0;
    let d2 = (sigma.derivative(x) / diffusion + s * s / (diffusion * diffusion)) * u0;
    (u0, d1, d2)
}

fn proposition_level(
    sigma: &SigmaProfile,
    spec: &ProcessSpec,
    grid: &GridSpec,
    case: PropositionCase,
) -> Result<ResidualLevel, DualityError> {
    let radial = RadialGrid::from_spec(spec, grid);
    let n = radial.len();
    let d = spec.diffusion;
    let h = radial.spacing();
    let (prev, now, next) = match case {
        PropositionCase::Unit => {
            let ones = vec![1.0; n];
            (ones.clone(), ones.clone(), ones)
        }
        PropositionCase::Survival => {
            let generator = Generator {
                dimension: 1,
                diffusion: d,
                sigma: scaled(sigma, 1.0 / d),
            };
            let evolution = ThetaEvolution::new(&generator, radial, OperatorKind::Backward, grid.dt)?;
            let mut s0 = vec![1.0; n];
            s0[0] = 0.0;
            let (steps, k) = evaluation_levels(grid);
            let mut levels = evolution.evolve(&Field::new(radial, s0, 0.0), steps)?;
            let next = levels.pop().map(|f| f.values).unwrap_or_default();
            let now = levels.pop().map(|f| f.values).unwrap_or_default();
            let prev = levels.pop().map(|f| f.values).unwrap_or_default();
            debug_assert_eq!(levels.len(), k - 1);
            (prev, now, next)
        }
    };
    let a = radial.start;
    let residual = interior_max(
        (0..n).map(|i| {
            if i == 0 || i + 1 == n {
                return 0.0;
            }
            let x = radial.node(i);
            let (u0, u0p, u0pp) = u0_with_derivatives(sigma, d, a, x);
            let v = now[i];
            let vx = (now[i + 1] - now[i - 1]) / (2.0 * h);
            let vxx = (now[i + 1] - 2.0 * now[i] + now[i - 1]) / (h * h);
            let vt = (next[i] - prev[i]) / (2.0 * grid.dt);
            let s = sigma.value(x);
            u0 * (d * vxx + (2.0 * d * u0p / u0 - s) * vx - vt) + v * (d * u0pp - s * u0p)
        }),
        n,
    );
    Ok(ResidualLevel {
        n_cells: grid.n_cells,
        h,
        dt: grid.dt,
        residual,
    })
}

fn scaled(sigma: &SigmaProfile, factor: f64) -> SigmaProfile {
    match *sigma {
        SigmaProfile::Constant { sigma } => SigmaProfile::Constant { sigma: sigma * factor },
        SigmaProfile::Linear { intercept, slope } => SigmaProfile::Linear {
            intercept: intercept * factor,
            slope: slope * factor,
        },
    }
}

/// Refinement study of `v·u0` against the forward equation `w_t = D w″ − σ w′`
/// in one dimension, where `v` solves `v_t = D v″ + σ v′` and
/// `u0 = exp(∫σ/D)`. Derivatives of `v` are taken on the grid, those of
/// `u0` exactly.
///
/// `sigma` is the drift velocity profile; `spec` supplies `D` and the left
/// end `a` of the interval `[a, r_max]`.
pub fn check_proposition(
    spec: &ProcessSpec,
    sigma: SigmaProfile,
    case: PropositionCase,
    base: &GridSpec,
    levels: usize,
) -> Result<ResidualStudy, DualityError> {
    let spec = spec.validate().map_err(NumericError::from)?;
    if spec.dimension != 1 {
        return Err(NumericError::Unsupported("the proposition is checked in one dimension").into());
    }
    let base = base.validate(&spec).map_err(NumericError::from)?;
    let levels = base
        .refinement_ladder(levels)
        .iter()
        .map(|g| proposition_level(&sigma, &spec, g, case))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ResidualStudy::from_levels(levels))
}

// ---------------------------------------------------------------- report

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CheckResult {
    Distribution(KsResult),
    Mean(MeanComparison),
    Theorem1(ResidualStudy),
    Proposition(ResidualStudy),
}

impl CheckResult {
    pub fn verdict(&self) -> Verdict {
        match self {
            CheckResult::Distribution(r) => r.verdict,
            CheckResult::Mean(r) => r.verdict,
            CheckResult::Theorem1(r) | CheckResult::Proposition(r) => r.verdict,
        }
    }

    /// Headline number and the threshold it is compared with.
    pub fn statistic_and_threshold(&self) -> (Option<f64>, Option<f64>) {
        match self {
            CheckResult::Distribution(r) => (Some(r.ks_statistic), Some(r.ks_critical)),
            CheckResult::Mean(r) => (r.mean_diff_se_units, Some(r.margin)),
            CheckResult::Theorem1(r) | CheckResult::Proposition(r) => {
                let worst = r
                    .ratios
                    .iter()
                    .copied()
                    .min_by(|x, y| (x - 4.0).abs().total_cmp(&(y - 4.0).abs()).reverse());
                if r.finest() < r.exact_tol || worst.is_none() {
                    (Some(r.finest()), Some(r.exact_tol))
                } else {
                    (worst, Some(r.ratio_band.0))
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub result: CheckResult,
    pub verdict: Verdict,
}

impl CheckRecord {
    pub fn new(name: impl Into<String>, result: CheckResult) -> Self {
        let verdict = result.verdict();
        CheckRecord {
            name: name.into(),
            result,
            verdict,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    pub checks: Vec<CheckRecord>,
    pub ks_pass: Option<bool>,
    pub mean_pass: Option<bool>,
    pub theorem1_pass: Option<bool>,
    pub proposition_pass: Option<bool>,
    /// No check failed.
    pub all_pass: bool,
}

impl DualityReport {
    pub fn from_checks(checks: Vec<CheckRecord>) -> Self {
        let flag = |pick: fn(&CheckResult) -> bool| -> Option<bool> {
            let mut any = false;
            let mut ok = true;
            for c in checks.iter().filter(|c| pick(&c.result)) {
                any = true;
                ok &= c.verdict.is_acceptable();
            }
            any.then_some(ok)
        };
        DualityReport {
            ks_pass: flag(|r| matches!(r, CheckResult::Distribution(_))),
            mean_pass: flag(|r| matches!(r, CheckResult::Mean(_))),
            theorem1_pass: flag(|r| matches!(r, CheckResult::Theorem1(_))),
            proposition_pass: flag(|r| matches!(r, CheckResult::Proposition(_))),
            all_pass: checks.iter().all(|c| c.verdict.is_acceptable()),
            checks,
        }
    }

    /// Whether every check failed, as negative controls should.
    pub fn all_fail(&self) -> bool {
        self.checks.iter().all(|c| c.verdict == Verdict::Fail)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identical_samples_have_zero_statistic() {
        let s = [0.3, 0.1, 0.7, 0.7, 2.0];
        let r = ks_verdict(&s, &s, 0.01);
        assert_eq!(r.ks_statistic, 0.0);
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn critical_constant() {
        // c(0.01) ≈ 1.628
        let c = ks_critical(0.01, 1, 1) / 2f64.sqrt();
        assert!((c - 1.628).abs() < 1e-3, "{c}");
    }

    #[test]
    fn disjoint_samples_have_unit_statistic() {
        assert_eq!(ks_statistic(&[1.0, 2.0], &[3.0, 4.0, 5.0]), 1.0);
        assert!((ks_statistic(&[1.0, 3.0], &[2.0, 4.0]) - 0.5).abs() < 1e-15);
    }

    fn brute_force(a: &[f64], b: &[f64]) -> f64 {
        let cdf = |s: &[f64], x: f64| s.iter().filter(|&&y| y <= x).count() as f64 / s.len() as f64;
        a.iter()
            .chain(b)
            .map(|&x| (cdf(a, x) - cdf(b, x)).abs())
            .fold(0.0, f64::max)
    }

    proptest! {
        #[test]
        fn statistic_is_symmetric_and_exact(
            a in proptest::collection::vec(0u8..20, 1..40),
            b in proptest::collection::vec(0u8..20, 1..40),
        ) {
            let a: Vec<f64> = a.into_iter().map(f64::from).collect();
            let b: Vec<f64> = b.into_iter().map(f64::from).collect();
            let d = ks_statistic(&a, &b);
            prop_assert_eq!(d, ks_statistic(&b, &a));
            prop_assert!((d - brute_force(&a, &b)).abs() < 1e-12);
        }
    }

    #[test]
    fn analytic_means() {
        let one = ProcessSpec::one_dimensional(1.0, 1.0, DriftSign::Inward, 1.0);
        let r = check_mean_duality(&one, MeanEngine::Analytic).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!((r.mean_minus.unwrap() - 1.0).abs() < 1e-12);
        let critical = ProcessSpec::radial(2, 1.0, 2.0, DriftSign::Inward, 1.0, 2.0);
        for engine in [MeanEngine::Analytic, MeanEngine::Numeric(grid(10.0, 100, 0.1, 1.0))] {
            let r = check_mean_duality(&critical, engine).unwrap();
            assert_eq!(r.verdict, Verdict::InfiniteRegime);
            assert!(r.mean_minus.is_none() && r.mean_plus_conditioned.is_none());
        }
    }

    #[test]
    fn numeric_means_in_two_dimensions() {
        let spec = ProcessSpec::radial(2, 1.0, 4.0, DriftSign::Outward, 1.0, 2.0);
        let r = check_mean_duality(&spec, MeanEngine::Numeric(grid(20.0, 1000, 0.1, 1.0))).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
        assert!((r.mean_plus_conditioned.unwrap() - 0.75).abs() < 5e-3);
    }

    fn grid(r_max: f64, n: usize, dt: f64, t_end: f64) -> GridSpec {
        GridSpec {
            r_max,
            n_cells: n,
            dt,
            t_end,
        }
    }

    #[test]
    fn driftless_theorem1_is_trivial() {
        let spec = ProcessSpec::radial(3, 1.0, 0.0, DriftSign::Outward, 1.0, 2.0);
        let study = check_theorem1_residual(&spec, &grid(6.0, 40, 0.05, 0.5), 2).unwrap();
        // K ≡ 1, so the residual is the CN consistency error alone
        assert!(study.finest() < 1.0);
    }

    #[test]
    fn unit_proposition_is_exact() {
        let spec = ProcessSpec::one_dimensional(1.0, 1.0, DriftSign::Inward, 1.0);
        let study = check_proposition(
            &spec,
            SigmaProfile::constant(-1.0),
            PropositionCase::Unit,
            &grid(8.0, 50, 0.05, 1.0),
            3,
        )
        .unwrap();
        assert!(study.finest() < 1e-10, "{:?}", study.norms());
        assert_eq!(study.verdict, Verdict::Pass);
    }

    #[test]
    fn report_flags() {
        let pass = CheckRecord::new("a", CheckResult::Distribution(ks_verdict(&[1.0], &[1.0], 0.01)));
        let inf = CheckRecord::new("b", CheckResult::Mean(MeanComparison::infinite(EngineKind::Analytic)));
        let report = DualityReport::from_checks(vec![pass, inf]);
        assert_eq!(report.ks_pass, Some(true));
        assert_eq!(report.mean_pass, Some(true));
        assert_eq!(report.theorem1_pass, None);
        assert!(report.all_pass);
        assert_eq!(Verdict::InfiniteRegime.to_string(), "INF-REGIME");
    }
}
