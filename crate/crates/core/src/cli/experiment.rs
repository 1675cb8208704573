//! Batch experiment execution: seeded repeated runs of each algorithm on
//! each cache, trace files per pair, and deterministic report/curve CSVs.

use super::CliError;
use crate::cache::{self, TuningCache};
use crate::methodology::{
    aggregate, baseline_curve, compute_budget, confidence_half_width, performance_curve,
    PerformanceCurve, TimeGrid,
};
use crate::opt::{self, AlgorithmSpec};
use crate::sim::{full_precision, run_optimizer, Trace};
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub cache_paths: Vec<PathBuf>,
    pub algorithms: Vec<AlgorithmSpec>,
    pub repeats: u64,
    pub master_seed: u64,
    pub cutoff: f64,
    pub grid_points: usize,
    pub out_dir: PathBuf,
    /// Worker thread limit; 0 picks the rayon default.
    pub workers: usize,
}

impl ExperimentConfig {
    pub fn new(
        cache_paths: Vec<PathBuf>,
        algorithms: Vec<AlgorithmSpec>,
        out_dir: PathBuf,
    ) -> Self {
        Self {
            cache_paths,
            algorithms,
            repeats: 100,
            master_seed: 0,
            cutoff: 0.95,
            grid_points: 50,
            out_dir,
            workers: 0,
        }
    }
}

#[derive(Debug)]
pub struct RunArtifacts {
    pub report_path: PathBuf,
    pub curve_path: PathBuf,
    pub trace_paths: Vec<PathBuf>,
}

/// Label an algorithm row is keyed by: the identifier plus any overrides,
/// exactly as given on the command line.
pub fn algorithm_label(spec: &AlgorithmSpec) -> String {
    let mut label = spec.name.clone();
    for (k, v) in &spec.overrides {
        label.push_str(&format!(",{k}={v}"));
    }
    label
}

fn sanitize_component(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' })
        .collect()
}

struct PairResult {
    algorithm: String,
    cache_id: String,
    budget_seconds: f64,
    curve: PerformanceCurve,
}

/// Executes the full experiment: budgets, seeded repeated runs, trace
/// files, per-space curves, aggregation, and the report/curve CSVs.
/// Identical configurations reproduce byte-identical outputs.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunArtifacts, CliError> {
    if config.repeats < 1 {
        return Err(CliError::Usage("repeats must be at least 1".into()));
    }
    if config.grid_points < 1 {
        return Err(CliError::Usage("grid needs at least one point".into()));
    }
    if !(config.cutoff > 0.0 && config.cutoff <= 1.0) {
        return Err(CliError::Usage(format!(
            "cutoff must be in (0, 1], got {}",
            config.cutoff
        )));
    }
    if config.cache_paths.is_empty() {
        return Err(CliError::Usage("no caches given".into()));
    }
    if config.algorithms.is_empty() {
        return Err(CliError::Usage("no algorithms given".into()));
    }
    // Validate algorithm names and hyperparameters up front.
    for spec in &config.algorithms {
        opt::build(spec)?;
    }
    let mut labels: Vec<String> = config.algorithms.iter().map(algorithm_label).collect();
    labels.sort();
    if labels.windows(2).any(|w| w[0] == w[1]) {
        return Err(CliError::Usage("duplicate algorithm specification".into()));
    }

    let mut caches: Vec<TuningCache> = Vec::with_capacity(config.cache_paths.len());
    for path in &config.cache_paths {
        caches.push(cache::load_cache(path)?);
    }
    {
        let mut ids: Vec<String> = caches.iter().map(|c| c.cache_id()).collect();
        ids.sort();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(CliError::Data("two caches share the same identifier".into()));
        }
    }

    std::fs::create_dir_all(&config.out_dir)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot build worker pool: {e}")))?;

    let mut pair_results: Vec<PairResult> = Vec::new();
    let mut trace_paths = Vec::new();
    for spec in &config.algorithms {
        let label = algorithm_label(spec);
        for cache in &caches {
            let cache_id = cache.cache_id();
            let fail = |e: CliError| {
                CliError::Data(format!(
                    "({cache_id}, {label}): {e}"
                ))
            };
            let budget = compute_budget(cache, config.cutoff)
                .map_err(|e| fail(e.into()))?;
            let grid = TimeGrid::new(budget, config.grid_points).map_err(|e| fail(e.into()))?;
            let baseline = baseline_curve(cache, &grid);

            let traces: Vec<Trace> = pool
                .install(|| {
                    (0..config.repeats)
                        .into_par_iter()
                        .map(|run_id| {
                            run_optimizer(spec, cache, budget, config.master_seed, run_id)
                        })
                        .collect::<Result<Vec<_>, _>>()
                })
                .map_err(|e| fail(e.into()))?;

            let trace_path = config.out_dir.join(format!(
                "traces__{}__{}.txt",
                sanitize_component(&label),
                sanitize_component(&cache_id)
            ));
            write_traces(&trace_path, &label, &cache_id, budget, config, &traces)?;
            trace_paths.push(trace_path);

            let curve = performance_curve(&traces, &baseline, cache.stats().optimum)
                .map_err(|e| fail(e.into()))?;
            pair_results.push(PairResult {
                algorithm: label.clone(),
                cache_id,
                budget_seconds: budget,
                curve,
            });
        }
    }

    // Deterministic assembly: rows sorted by algorithm, then space.
    pair_results.sort_by(|a, b| {
        a.algorithm
            .cmp(&b.algorithm)
            .then(a.cache_id.cmp(&b.cache_id))
    });

    let report_path = config.out_dir.join("report.csv");
    let curve_path = config.out_dir.join("curve.csv");
    write_report(&report_path, config, &pair_results)?;
    write_curves(&curve_path, config, &pair_results)?;

    Ok(RunArtifacts {
        report_path,
        curve_path,
        trace_paths,
    })
}

fn write_traces(
    path: &Path,
    label: &str,
    cache_id: &str,
    budget: f64,
    config: &ExperimentConfig,
    traces: &[Trace],
) -> Result<(), CliError> {
    let mut out = Vec::new();
    writeln!(
        out,
        "# algorithm={label} cache={cache_id} budget_seconds={} cutoff={} repeats={} master_seed={} grid_points={}",
        full_precision(budget),
        full_precision(config.cutoff),
        config.repeats,
        config.master_seed,
        config.grid_points
    )?;
    for trace in traces {
        for line in trace.record_lines() {
            writeln!(out, "{line}")?;
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn write_report(
    path: &Path,
    config: &ExperimentConfig,
    pairs: &[PairResult],
) -> Result<(), CliError> {
    let mut out = Vec::new();
    writeln!(
        out,
        "algorithm,cache_id,score,ci95_half_width,repeats,budget_seconds,cutoff"
    )?;
    for pair in pairs {
        let run_scores = pair.curve.run_scores();
        let half_width = if run_scores.len() >= 2 {
            let mean = run_scores.iter().sum::<f64>() / run_scores.len() as f64;
            let var = run_scores.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>()
                / (run_scores.len() - 1) as f64;
            confidence_half_width(var.sqrt(), run_scores.len())
                .expect("two or more runs")
        } else {
            0.0
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            pair.algorithm,
            pair.cache_id,
            full_precision(pair.curve.score()),
            full_precision(half_width),
            config.repeats,
            full_precision(pair.budget_seconds),
            full_precision(config.cutoff)
        )?;
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn write_curves(
    path: &Path,
    config: &ExperimentConfig,
    pairs: &[PairResult],
) -> Result<(), CliError> {
    let mut out = Vec::new();
    writeln!(
        out,
        "algorithm,t_fraction,mean_score,ci95_low,ci95_high,spaces,repeats"
    )?;
    let mut by_algorithm: BTreeMap<&str, BTreeMap<String, PerformanceCurve>> = BTreeMap::new();
    for pair in pairs {
        by_algorithm
            .entry(&pair.algorithm)
            .or_default()
            .insert(pair.cache_id.clone(), pair.curve.clone());
    }
    for (label, curves) in &by_algorithm {
        let report = aggregate(curves).map_err(|e| {
            CliError::Data(format!("aggregating {label}: {e}"))
        })?;
        for (idx, (&mean, &half)) in report
            .aggregate_values
            .iter()
            .zip(&report.ci_half_widths)
            .enumerate()
        {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                label,
                full_precision((idx + 1) as f64 / config.grid_points as f64),
                full_precision(mean),
                full_precision(mean - half),
                full_precision(mean + half),
                report.space_count,
                config.repeats
            )?;
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}
