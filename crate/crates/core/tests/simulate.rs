use fpduality::analytic;
use fpduality::simulate::*;
use fpduality::{DriftSign, ProcessSpec, SimConfig};

fn config(n_paths: u64, dt: f64, t_max: f64, r_escape: f64, seed: u64) -> SimConfig {
    SimConfig {
        n_paths,
        dt,
        t_max,
        r_escape,
        seed,
        bridge_correction: true,
    }
}

fn with_threads(spec: &ProcessSpec, cfg: &SimConfig, threads: usize) -> FirstPassageEnsemble {
    let options = RunOptions {
        threads: Some(threads),
        ..RunOptions::default()
    };
    run_ensemble_with(spec, cfg, options).unwrap()
}

fn combined_se(p: f64, q: f64, n: u64, m: u64) -> f64 {
    (p * (1.0 - p) / n as f64 + q * (1.0 - q) / m as f64).sqrt()
}

#[test]
fn outcomes_do_not_depend_on_worker_count() {
    let spec = ProcessSpec::radial(3, 1.0, 1.0, DriftSign::Outward, 1.0, 2.0);
    let cfg = config(3000, 1e-3, 2.0, default_escape_radius(&spec, 3000), 5);
    let one = with_threads(&spec, &cfg, 1);
    for threads in [2, 5] {
        assert_eq!(one.outcomes, with_threads(&spec, &cfg, threads).outcomes);
    }
    let again = simulate_path(&spec, &cfg, PathKey { seed: 5, index: 17 });
    assert_eq!(again, one.outcomes[17]);
}

#[test]
fn start_on_the_target_hits_in_the_first_step() {
    let spec = ProcessSpec::radial(3, 1.0, 1.0, DriftSign::Outward, 1.0, 1.0 + 1e-12);
    let cfg = config(200, 1e-3, 1.0, default_escape_radius(&spec, 200), 3);
    let ens = run_ensemble(&spec, &cfg).unwrap();
    assert_eq!(ens.n_hits(), 200);
    assert!(ens.conditioned_sample().iter().all(|&t| t <= cfg.dt));
}

#[test]
fn inward_line_is_recurrent() {
    let spec = ProcessSpec::one_dimensional(1.0, 1.0, DriftSign::Inward, 1.0);
    let ens = run_ensemble(&spec, &config(100_000, 1e-3, 100.0, 10.0, 9)).unwrap();
    assert!(ens.hit_fraction() >= 0.999, "{}", ens.hit_fraction());
}

#[test]
fn outward_line_hit_fraction() {
    let spec = ProcessSpec::one_dimensional(1.0, 1.0, DriftSign::Outward, 1.0);
    let n = 40_000;
    let ens = run_ensemble(&spec, &config(n, 1e-3, 200.0, default_escape_radius(&spec, n), 21)).unwrap();
    let stats = conditioned_statistics(&ens).unwrap();
    let h = analytic::hitting_probability(&spec);
    assert!(
        (stats.hit_fraction - h).abs() < 3.0 * stats.hit_fraction_se,
        "{stats:?}"
    );
    assert!(
        (stats.conditioned_mean - 1.0).abs() < 3.0 * stats.conditioned_mean_se,
        "{stats:?}"
    );
}

#[test]
fn halving_dt_keeps_hit_fraction() {
    let spec = ProcessSpec::one_dimensional(1.0, 1.0, DriftSign::Outward, 1.0);
    let n = 20_000;
    let r_escape = default_escape_radius(&spec, n);
    let coarse = run_ensemble(&spec, &config(n, 2e-3, 50.0, r_escape, 1)).unwrap();
    let fine = run_ensemble(&spec, &config(n, 1e-3, 50.0, r_escape, 2)).unwrap();
    let (p, q) = (coarse.hit_fraction(), fine.hit_fraction());
    assert!((p - q).abs() < 3.0 * combined_se(p, q, n, n), "{p} {q}");
}

#[test]
fn radial_reduction_matches_euclidean_paths() {
    let spec = ProcessSpec::radial(3, 1.0, 1.0, DriftSign::Outward, 1.0, 2.0);
    let cfg = SimConfig {
        bridge_correction: false,
        ..config(4000, 1e-3, 2.0, 40.0, 77)
    };
    let radial: Vec<PathOutcome> = (0..cfg.n_paths)
        .map(|index| simulate_path(&spec, &cfg, PathKey { seed: cfg.seed, index }))
        .collect();
    let euclid: Vec<PathOutcome> = (0..cfg.n_paths)
        .map(|index| {
            simulate_path_euclidean(
                &spec,
                &cfg,
                PathKey {
                    seed: cfg.seed + 1,
                    index,
                },
            )
        })
        .collect();
    let frac = |v: &[PathOutcome]| v.iter().filter(|o| o.hit_time().is_some()).count() as f64 / v.len() as f64;
    let (p, q) = (frac(&radial), frac(&euclid));
    assert!(
        (p - q).abs() < 3.0 * combined_se(p, q, cfg.n_paths, cfg.n_paths),
        "{p} {q}"
    );
}

#[test]
fn escape_radius_respects_censoring_bound() {
    for spec in [
        ProcessSpec::one_dimensional(1.0, 1.0, DriftSign::Outward, 1.0),
        ProcessSpec::radial(2, 1.0, 4.0, DriftSign::Outward, 1.0, 2.0),
        ProcessSpec::radial(3, 1.0, 1.0, DriftSign::Inward, 1.0, 2.0),
    ] {
        let n = 100_000;
        let cfg = config(n, 1e-3, 10.0, default_escape_radius(&spec, n), 1);
        check_censoring_bound(&spec, &cfg).unwrap();
        let tight = SimConfig {
            r_escape: spec.start_radius + 0.5,
            ..cfg
        };
        assert!(check_censoring_bound(&spec, &tight).is_err());
    }
    let recurrent = ProcessSpec::radial(2, 1.0, 4.0, DriftSign::Inward, 1.0, 2.0);
    assert_eq!(default_escape_radius(&recurrent, 1000), 20.0);
}

#[test]
fn no_hits_is_signalled() {
    let spec = ProcessSpec::radial(3, 1.0, 3.0, DriftSign::Outward, 1.0, 4.0);
    let ens = run_ensemble(&spec, &config(50, 1e-2, 0.05, default_escape_radius(&spec, 50), 1)).unwrap();
    assert_eq!(ens.n_hits(), 0);
    assert!(matches!(conditioned_statistics(&ens), Err(SimError::NoHits { hit_fraction }) if hit_fraction == 0.0));
}
