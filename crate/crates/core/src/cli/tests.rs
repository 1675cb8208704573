use super::*;
use crate::cache::{synth_cache, write_cache, SynthKind};
use crate::opt::AlgorithmSpec;
use crate::test_support::values_cache;
use std::path::PathBuf;

fn synth_file(kind: SynthKind, dims: u32, points: u32, seed: u64, dir: &Path) -> PathBuf {
    let cache = synth_cache(kind, dims, points, seed).unwrap();
    let path = dir.join(format!("{kind}_{dims}x{points}_{seed}.json"));
    write_cache(&cache, &path).unwrap();
    path
}

#[test]
fn validate_reports_counts_and_exit_semantics() {
    let dir = tempfile::tempdir().unwrap();
    let path = synth_file(SynthKind::Bowl, 2, 5, 1, dir.path());
    let report = cmd_validate(&path, None).unwrap();
    assert!(report.contains("cartesian=25 constrained=25 dims=2"), "{report}");

    let err = cmd_validate("/no/such/cache.json", None).unwrap_err();
    assert_eq!(err.exit_code(), EXIT_USAGE);

    // Breaking exhaustiveness must map to a data error naming the config.
    let mut model: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    model["entries"].as_array_mut().unwrap().remove(7);
    std::fs::write(&path, model.to_string()).unwrap();
    let err = cmd_validate(&path, None).unwrap_err();
    assert_eq!(err.exit_code(), EXIT_DATA);
    assert!(err.to_string().contains("missing entry"), "{err}");
}

#[test]
fn validate_checks_expected_counts() {
    let dir = tempfile::tempdir().unwrap();
    let path = synth_file(SynthKind::Bowl, 2, 5, 1, dir.path());
    let expected = ExpectedCounts {
        cartesian_size: Some(22272),
        constrained_size: Some(11130),
        dimensions: Some(8),
    };
    let err = cmd_validate(&path, Some(expected)).unwrap_err();
    assert_eq!(err.exit_code(), EXIT_DATA);
    assert!(err.to_string().contains("mismatch"), "{err}");
}

#[test]
fn stats_prints_hand_checked_lines() {
    let dir = tempfile::tempdir().unwrap();
    let cache = values_cache(&[1.0, 2.0, 3.0, 4.0], &[1.0; 4]);
    let path = dir.path().join("values.json");
    write_cache(&cache, &path).unwrap();
    let out = cmd_stats(&path, 0.95).unwrap();
    assert!(out.contains("cartesian=4 constrained=4 dims=1"), "{out}");
    assert!(out.contains("optimum=1 median=2.5 mean_eval_cost=1"), "{out}");
    assert!(out.contains("cutoff=0.95"), "{out}");

    let degenerate = values_cache(&[3.0, 3.0], &[1.0; 2]);
    let path = dir.path().join("degenerate.json");
    write_cache(&degenerate, &path).unwrap();
    let out = cmd_stats(&path, 0.95).unwrap();
    assert!(out.contains("budget=degenerate"), "{out}");
}

#[test]
fn gen_synthetic_round_trips_through_validate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bowl.json");
    cmd_gen_synthetic(SynthKind::Bowl, 2, 5, 1, &out).unwrap();
    let report = cmd_validate(&out, None).unwrap();
    assert!(report.contains("constrained=25"), "{report}");

    let rugged = dir.path().join("rugged.json");
    let msg = cmd_gen_synthetic(SynthKind::Rugged, 3, 8, 7, &rugged).unwrap();
    assert!(msg.contains("of 512 configurations"), "{msg}");
    cmd_validate(&rugged, None).unwrap();

    let err = cmd_gen_synthetic(SynthKind::Bowl, 10, 10, 0, dir.path().join("big.json"))
        .unwrap_err();
    assert_eq!(err.exit_code(), EXIT_USAGE);
}

fn quick_config(dir: &Path, caches: Vec<PathBuf>, algos: &[&str]) -> ExperimentConfig {
    let algorithms = algos
        .iter()
        .map(|a| a.parse::<AlgorithmSpec>().unwrap())
        .collect();
    ExperimentConfig {
        repeats: 4,
        master_seed: 7,
        grid_points: 10,
        workers: 2,
        ..ExperimentConfig::new(caches, algorithms, dir.join("out"))
    }
}

#[test]
fn experiment_is_reproducible_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let cache = synth_file(SynthKind::Rugged, 2, 5, 3, dir.path());
    let mut blobs: Vec<(Vec<u8>, Vec<u8>, Vec<u8>)> = Vec::new();
    for round in 0..2 {
        let mut config = quick_config(dir.path(), vec![cache.clone()], &["random_search", "hybrid_vndx"]);
        config.out_dir = dir.path().join(format!("out{round}"));
        // Alternate worker counts: scheduling must not affect the bytes.
        config.workers = 1 + round;
        let artifacts = run_experiment(&config).unwrap();
        blobs.push((
            std::fs::read(&artifacts.report_path).unwrap(),
            std::fs::read(&artifacts.curve_path).unwrap(),
            std::fs::read(&artifacts.trace_paths[0]).unwrap(),
        ));
    }
    assert_eq!(blobs[0].0, blobs[1].0, "report.csv must be identical");
    assert_eq!(blobs[0].1, blobs[1].1, "curve.csv must be identical");
    assert_eq!(blobs[0].2, blobs[1].2, "trace files must be identical");
}

#[test]
fn curve_file_has_one_row_per_algorithm_and_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let cache = synth_file(SynthKind::Bowl, 2, 5, 1, dir.path());
    let config = quick_config(
        dir.path(),
        vec![cache],
        &["random_search", "simulated_annealing"],
    );
    let artifacts = run_experiment(&config).unwrap();
    let curve = std::fs::read_to_string(&artifacts.curve_path).unwrap();
    let data_rows = curve.lines().count() - 1;
    assert_eq!(data_rows, 2 * config.grid_points);
    assert!(curve.starts_with(
        "algorithm,t_fraction,mean_score,ci95_low,ci95_high,spaces,repeats"
    ));
}

#[test]
fn report_score_equals_mean_of_aggregate_curve() {
    let dir = tempfile::tempdir().unwrap();
    let cache = synth_file(SynthKind::Rugged, 2, 6, 9, dir.path());
    let config = quick_config(dir.path(), vec![cache], &["genetic_algorithm"]);
    let artifacts = run_experiment(&config).unwrap();

    let report = std::fs::read_to_string(&artifacts.report_path).unwrap();
    let row = report.lines().nth(1).unwrap();
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(fields[0], "genetic_algorithm");
    let score: f64 = fields[2].parse().unwrap();

    let curve = std::fs::read_to_string(&artifacts.curve_path).unwrap();
    let means: Vec<f64> = curve
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse::<f64>().unwrap())
        .collect();
    assert_eq!(means.len(), config.grid_points);
    let curve_mean = means.iter().sum::<f64>() / means.len() as f64;
    assert!(
        (score - curve_mean).abs() <= 1e-12,
        "score {score} vs curve mean {curve_mean}"
    );
}

#[test]
fn experiment_rejects_bad_requests() {
    let dir = tempfile::tempdir().unwrap();
    let cache = synth_file(SynthKind::Bowl, 2, 4, 2, dir.path());

    let config = quick_config(dir.path(), vec![cache.clone()], &["warp_drive"]);
    let err = run_experiment(&config).unwrap_err();
    assert_eq!(err.exit_code(), EXIT_USAGE);

    let mut config = quick_config(dir.path(), vec![cache.clone()], &["random_search"]);
    config.repeats = 0;
    assert_eq!(run_experiment(&config).unwrap_err().exit_code(), EXIT_USAGE);

    let config = quick_config(
        dir.path(),
        vec![cache.clone(), cache],
        &["random_search"],
    );
    let err = run_experiment(&config).unwrap_err();
    assert_eq!(err.exit_code(), EXIT_DATA, "duplicate cache ids: {err}");
}

#[test]
fn degenerate_space_names_the_failing_pair() {
    let dir = tempfile::tempdir().unwrap();
    let cache = values_cache(&[2.0, 2.0, 2.0], &[1.0; 3]);
    let path = dir.path().join("flat.json");
    write_cache(&cache, &path).unwrap();
    let config = quick_config(dir.path(), vec![path], &["random_search"]);
    let err = run_experiment(&config).unwrap_err();
    assert_eq!(err.exit_code(), EXIT_DATA);
    assert!(
        err.to_string().contains("values/synthetic/fixture")
            && err.to_string().contains("random_search"),
        "{err}"
    );
}
