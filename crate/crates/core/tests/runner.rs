use std::collections::HashSet;
use std::path::PathBuf;

use serde_json::{json, Value};
use tcd_core::runner::{exit_code, run, validate_config, Experiment, ExperimentConfig, ResultManifest, MANIFEST_NAME};
use tcd_core::seeding::seed_for;
use tcd_core::Error;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("tcd-runner-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

/// A desk-instant configuration of `experiment`.
fn tiny(experiment: Experiment) -> ExperimentConfig {
    let doc = json!({
        "experiment": experiment.name(),
        "model": { "kappa": 1.0 },
        "sector": { "n_p": 10, "n_atoms": 3 },
        "truncation": { "n_cut": 1, "two_s": 1 },
        "ensemble": { "count": 3, "base_seed": 7 },
        "grids": {
            "lambdas": [2.0, 10.0],
            "t_max": 100.0,
            "t_points": 40,
            "sff_points_per_decade": 10,
            "tau_points": 40
        },
        "stats": { "baseline_dim": 40, "baseline_count": 3, "unfolding_degree": 5 },
        "classical": {
            "n_states": 3,
            "integrator": { "t_end": 40.0 },
            "lyapunov": { "m_steps": 20 },
            "sampler": { "burn_in": 50, "thin": 5 }
        }
    });
    validate_config(&doc.to_string()).unwrap()
}

fn violations(raw: &str) -> Vec<String> {
    match validate_config(raw) {
        Err(Error::Config(v)) => v,
        other => panic!("expected violations, got {other:?}"),
    }
}

fn read(dir: &PathBuf, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap()
}

#[test]
fn missing_or_empty_experiment_is_required() {
    assert_eq!(violations("{}"), vec!["experiment: required"]);
    assert_eq!(violations(r#"{"experiment": ""}"#), vec!["experiment: required"]);
    assert!(violations(r#"{"experiment": "nope"}"#)[0].starts_with("experiment: unknown value"));
}

#[test]
fn negative_lambda_is_a_violation() {
    let v = violations(r#"{"experiment": "eigenstate_stats", "model": {"lambda": -1.0}}"#);
    assert!(v.iter().any(|m| m.starts_with("model.lambda")), "{v:?}");
}

#[test]
fn unknown_keys_are_rejected() {
    let v = violations(r#"{"experiment": "baselines", "modle": {}}"#);
    assert!(v[0].starts_with("schema:"), "{v:?}");
    let v = violations(r#"{"experiment": "baselines", "stats": {"bins": 3}}"#);
    assert!(v[0].starts_with("schema:"), "{v:?}");
}

#[test]
fn omitted_fields_take_documented_defaults() {
    let c = validate_config(r#"{"experiment": "spectral_stats_hermitian"}"#).unwrap();
    assert_eq!(c.stats.unfolding_degree, 10);
    assert_eq!(c, ExperimentConfig::new(Experiment::SpectralStatsHermitian));
}

#[test]
fn every_violation_is_reported() {
    let v = violations(r#"{"experiment": "nh_stats", "model": {"lambda": -1.0, "kappa": 0.0}, "ensemble": {"count": 1}}"#);
    assert!(v.len() >= 3, "{v:?}");
    assert_eq!(exit_code(&Error::Config(v)), 2);
}

#[test]
fn numerical_failures_exit_with_three() {
    assert_eq!(exit_code(&Error::Eigensolver("no convergence".into()).in_realization(4)), 3);
}

#[test]
fn seeds_are_stable_and_collision_free() {
    assert_eq!(seed_for(11, 5), seed_for(11, 5));
    assert_ne!(seed_for(11, 5), seed_for(12, 5));
    let seen: HashSet<u64> = (0..1_000_000u64).map(|i| seed_for(42, i)).collect();
    assert_eq!(seen.len(), 1_000_000);
}

#[test]
fn manifest_lists_every_emitted_file() {
    for experiment in Experiment::ALL {
        let dir = scratch(&format!("all-{}", experiment.name()));
        let manifest = run(&tiny(experiment), &dir, Some(1)).unwrap();
        let mut on_disk: Vec<String> = std::fs::read_dir(&dir)
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .filter(|n| n != MANIFEST_NAME)
            .collect();
        on_disk.sort();
        let mut listed: Vec<String> = manifest.files.iter().map(|f| f.name.clone()).collect();
        listed.sort();
        assert_eq!(on_disk, listed, "{experiment}");
        for f in &manifest.files {
            assert_eq!(f.sha256, tcd_core::runner::sha256_hex(&read(&dir, &f.name)));
        }
        let echoed: Value = serde_json::from_slice(&read(&dir, MANIFEST_NAME)).unwrap();
        assert_eq!(echoed["experiment"], experiment.name());
        assert_eq!(echoed["config"]["ensemble"]["base_seed"], 7);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}

fn checksums(m: &ResultManifest) -> Vec<(String, String)> {
    m.files.iter().map(|f| (f.name.clone(), f.sha256.clone())).collect()
}

#[test]
fn reruns_are_byte_identical() {
    for experiment in [Experiment::RVsLambdaSweep, Experiment::NhStats, Experiment::LyapunovEnsemble] {
        let config = tiny(experiment);
        let (a, b) = (scratch(&format!("rerun-a-{experiment}")), scratch(&format!("rerun-b-{experiment}")));
        let first = run(&config, &a, Some(1)).unwrap();
        let second = run(&config, &b, Some(1)).unwrap();
        assert_eq!(checksums(&first), checksums(&second), "{experiment}");
        std::fs::remove_dir_all(&a).unwrap();
        std::fs::remove_dir_all(&b).unwrap();
    }
}

#[test]
fn thread_count_does_not_change_results() {
    for experiment in [Experiment::SpectralStatsHermitian, Experiment::ClassicalScatter] {
        let config = tiny(experiment);
        let (a, b) = (scratch(&format!("serial-{experiment}")), scratch(&format!("parallel-{experiment}")));
        let serial = run(&config, &a, Some(1)).unwrap();
        let parallel = run(&config, &b, Some(3)).unwrap();
        assert_eq!(parallel.threads, 3);
        assert_eq!(checksums(&serial), checksums(&parallel), "{experiment}");
        std::fs::remove_dir_all(&a).unwrap();
        std::fs::remove_dir_all(&b).unwrap();
    }
}

#[test]
fn seed_changes_disordered_outputs() {
    let mut config = tiny(Experiment::RVsLambdaSweep);
    let (a, b) = (scratch("seed-a"), scratch("seed-b"));
    let first = run(&config, &a, Some(1)).unwrap();
    config.ensemble.base_seed = 8;
    let second = run(&config, &b, Some(1)).unwrap();
    assert_ne!(checksums(&first), checksums(&second));
    std::fs::remove_dir_all(&a).unwrap();
    std::fs::remove_dir_all(&b).unwrap();
}

#[test]
fn sweep_table_layout() {
    let dir = scratch("sweep");
    run(&tiny(Experiment::RVsLambdaSweep), &dir, Some(1)).unwrap();
    let text = String::from_utf8(read(&dir, "r_vs_lambda.csv")).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&header[..3], &["lambda", "mean_r", "stderr"]);
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!((rows[0][0], rows[1][0]), (2.0, 10.0));
    assert!(rows.iter().all(|r| (0.0..=1.0).contains(&r[1])));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn baselines_cover_all_reference_ensembles() {
    let dir = scratch("baselines");
    let manifest = run(&tiny(Experiment::Baselines), &dir, Some(1)).unwrap();
    let names: Vec<&str> = manifest.files.iter().map(|f| f.name.as_str()).collect();
    for want in ["baselines_real.csv", "baselines_complex.csv"] {
        assert!(names.contains(&want), "{names:?}");
    }
    let real = String::from_utf8(read(&dir, "baselines_real.csv")).unwrap();
    let complex = String::from_utf8(read(&dir, "baselines_complex.csv")).unwrap();
    for kind in ["goe", "poisson"] {
        assert!(real.lines().any(|l| l.starts_with(kind)), "{real}");
    }
    for kind in ["ginue", "ai_dagger", "poisson2d"] {
        assert!(complex.lines().any(|l| l.starts_with(kind)), "{complex}");
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn config_violations_stop_before_any_output() {
    let mut config = tiny(Experiment::NhStats);
    config.model.kappa = 0.0;
    let dir = scratch("invalid");
    let err = run(&config, &dir, Some(1)).unwrap_err();
    assert_eq!(exit_code(&err), 2);
    assert!(!dir.exists());
}
