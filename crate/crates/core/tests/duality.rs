use fpduality::duality::*;
use fpduality::numeric::SigmaProfile;
use fpduality::simulate::run_ensemble;
use fpduality::{DriftSign, GridSpec, ProcessSpec, SimConfig};

fn grid(r_max: f64, n: usize, dt: f64, t_end: f64) -> GridSpec {
    GridSpec {
        r_max,
        n_cells: n,
        dt,
        t_end,
    }
}

fn d3() -> ProcessSpec {
    ProcessSpec::radial(3, 1.0, 1.0, DriftSign::Outward, 1.0, 2.0)
}

fn line(sign: DriftSign) -> ProcessSpec {
    ProcessSpec::one_dimensional(1.0, 1.0, sign, 1.0)
}

#[test]
fn theorem1_residual_is_second_order() {
    let study = check_theorem1_residual(&d3(), &grid(6.0, 50, 0.04, 1.0), 4).unwrap();
    assert_eq!(study.verdict, Verdict::Pass, "{:?}", study.ratios);
    assert_eq!(study.levels.len(), 4);
    for w in study.levels.windows(2) {
        assert_eq!(w[1].n_cells, 2 * w[0].n_cells);
        assert!((w[1].dt - w[0].dt / 2.0).abs() < 1e-15);
    }
}

#[test]
fn theorem1_residual_is_sign_agnostic() {
    let base = grid(6.0, 50, 0.04, 1.0);
    let plus = check_theorem1_residual(&d3(), &base, 2).unwrap();
    let minus = check_theorem1_residual(&d3().mirrored(), &base, 2).unwrap();
    assert_eq!(plus.norms(), minus.norms());
}

#[test]
fn perturbed_drift_stalls() {
    let profile = SigmaProfile::Linear {
        intercept: 0.0,
        slope: 1.0,
    };
    let study = check_theorem1_residual_profile(&d3(), &grid(6.0, 50, 0.04, 1.0), 4, profile).unwrap();
    assert_eq!(study.verdict, Verdict::Fail);
    assert!(study.norms().iter().all(|&r| r > 1e-3), "{:?}", study.norms());
}

#[test]
fn constant_proposition_cases() {
    let base = grid(8.0, 50, 0.05, 1.0);
    let sigma = SigmaProfile::constant(-1.0);
    let unit = check_proposition(&line(DriftSign::Inward), sigma, PropositionCase::Unit, &base, 4).unwrap();
    assert!(unit.finest() < 1e-10);
    assert_eq!(unit.verdict, Verdict::Pass);
    let survival = check_proposition(&line(DriftSign::Inward), sigma, PropositionCase::Survival, &base, 4).unwrap();
    assert_eq!(survival.verdict, Verdict::Pass, "{:?}", survival.ratios);
    assert!(survival.ratios.iter().all(|r| (3.5..=4.5).contains(r)));
}

#[test]
fn perturbed_proposition_stalls() {
    let sigma = SigmaProfile::Linear {
        intercept: 0.0,
        slope: 1.0,
    };
    for case in [PropositionCase::Unit, PropositionCase::Survival] {
        let study = check_proposition(&line(DriftSign::Inward), sigma, case, &grid(4.0, 40, 0.05, 0.5), 4).unwrap();
        assert_eq!(study.verdict, Verdict::Fail);
        assert!(study.norms().iter().all(|&r| r > 1e-3));
    }
}

#[test]
fn proposition_requires_one_dimension() {
    assert!(check_proposition(
        &d3(),
        SigmaProfile::constant(1.0),
        PropositionCase::Unit,
        &grid(6.0, 40, 0.05, 0.5),
        2
    )
    .is_err());
}

#[test]
fn analytic_and_numeric_mean_engines_agree() {
    let spec = ProcessSpec::radial(2, 1.0, 4.0, DriftSign::Outward, 1.0, 2.0);
    let analytic = check_mean_duality(&spec, MeanEngine::Analytic).unwrap();
    assert_eq!(analytic.verdict, Verdict::Pass);
    assert_eq!(analytic.mean_plus_conditioned, Some(0.75));
    let numeric = check_mean_duality(&spec, MeanEngine::Numeric(grid(20.0, 2000, 0.1, 1.0))).unwrap();
    assert_eq!(numeric.verdict, Verdict::Pass, "{numeric:?}");
    for m in [numeric.mean_plus_conditioned, numeric.mean_minus] {
        assert!((m.unwrap() - 0.75).abs() < 5e-3);
    }
}

#[test]
fn infinite_regimes_are_distinguished() {
    let critical = ProcessSpec::radial(2, 1.0, 2.0, DriftSign::Outward, 1.0, 2.0);
    for engine in [MeanEngine::Analytic, MeanEngine::Numeric(grid(20.0, 400, 0.1, 1.0))] {
        let r = check_mean_duality(&critical, engine).unwrap();
        assert_eq!(r.verdict, Verdict::InfiniteRegime);
        assert!(r.mean_plus_conditioned.is_none() && r.mean_minus.is_none());
    }
    let r = check_mean_duality(&d3(), MeanEngine::Analytic).unwrap();
    assert_eq!(r.verdict, Verdict::InfiniteRegime);
}

#[test]
fn simulated_duality_in_one_dimension() {
    let config = SimConfig {
        n_paths: 20_000,
        dt: 1e-3,
        t_max: 30.0,
        r_escape: 12.0,
        seed: 100,
        bridge_correction: true,
    };
    let plus = run_ensemble(&line(DriftSign::Outward), &config).unwrap();
    let minus = run_ensemble(&line(DriftSign::Inward), &SimConfig { seed: 1000, ..config }).unwrap();
    let ks = check_distribution_duality(&plus, &minus, 0.01).unwrap();
    assert_eq!(ks.verdict, Verdict::Pass, "{ks:?}");
    let mean = check_mean_duality(
        &line(DriftSign::Outward),
        MeanEngine::Simulate {
            plus: &plus,
            minus: &minus,
        },
    )
    .unwrap();
    assert_eq!(mean.verdict, Verdict::Pass, "{mean:?}");

    let faster = ProcessSpec {
        drift_strength: 2.0,
        ..line(DriftSign::Inward)
    };
    let other = run_ensemble(&faster, &SimConfig { seed: 13, ..config }).unwrap();
    assert!(check_distribution_duality(&plus, &other, 0.01).is_err());
    let mismatch = ks_verdict(&minus.conditioned_sample(), &other.conditioned_sample(), 0.01);
    assert_eq!(mismatch.verdict, Verdict::Fail);
}

#[test]
fn report_serializes_round_trip() {
    let study = check_theorem1_residual(&d3(), &grid(6.0, 50, 0.04, 1.0), 2).unwrap();
    let report = DualityReport::from_checks(vec![
        CheckRecord::new("theorem1_residual", CheckResult::Theorem1(study)),
        CheckRecord::new(
            "mean_duality",
            CheckResult::Mean(check_mean_duality(&d3(), MeanEngine::Analytic).unwrap()),
        ),
    ]);
    let text = serde_json::to_string(&report).unwrap();
    let back: DualityReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back.checks.len(), 2);
    assert_eq!(back.theorem1_pass, report.theorem1_pass);
    assert_eq!(back.mean_pass, Some(true));
}
