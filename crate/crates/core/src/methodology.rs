//! The community evaluation methodology: an analytic random-search
//! baseline, cutoff-derived time budgets, baseline-relative performance
//! curves on a fixed time grid, cross-space aggregation, and confidence
//! intervals.
//!
//! All math runs on minimization-normalized objectives. A curve value of 0
//! means parity with the baseline and 1 means the optimum was found;
//! worse-than-baseline values are negative and deliberately not clamped.

use crate::cache::{SpaceStats, TuningCache};
use crate::sim::Trace;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MethodologyError {
    #[error("out of range: {0}")]
    OutOfRange(String),
    #[error("space is degenerate: median equals optimum")]
    DegenerateSpace,
    #[error("baseline equals the optimum at t={time}; curve denominator is zero")]
    DegenerateDenominator { time: f64 },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
}

/// Strictly increasing, equidistant sampling times in (0, B], ending at B.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    budget: f64,
    points: Vec<f64>,
}

/// Default sampling-point count.
pub const DEFAULT_GRID_POINTS: usize = 50;

impl TimeGrid {
    pub fn new(budget_seconds: f64, points: usize) -> Result<Self, MethodologyError> {
        if budget_seconds.is_nan() || budget_seconds <= 0.0 {
            return Err(MethodologyError::OutOfRange(format!(
                "budget must be positive, got {budget_seconds}"
            )));
        }
        if points == 0 {
            return Err(MethodologyError::OutOfRange("grid needs at least one point".into()));
        }
        let n = points as f64;
        let points = (1..=points)
            .map(|i| budget_seconds * (i as f64 / n))
            .collect();
        Ok(Self {
            budget: budget_seconds,
            points,
        })
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Budget fractions (0, 1] of the sampling points.
    pub fn fraction(&self, index: usize) -> f64 {
        (index + 1) as f64 / self.points.len() as f64
    }
}

/// Expected minimum of `n` uniform draws without replacement from the
/// sorted `values`: sum over sorted positions of v_(i) * C(N-i, n-1) / C(N, n),
/// computed with an overflow-safe ratio recurrence.
pub fn expected_min_after_n(sorted_values: &[f64], n: usize) -> Result<f64, MethodologyError> {
    let count = sorted_values.len();
    if n < 1 || n > count {
        return Err(MethodologyError::OutOfRange(format!(
            "n must be in 1..={count}, got {n}"
        )));
    }
    debug_assert!(sorted_values.is_sorted_by(|a, b| a <= b));
    // P(min is the i-th smallest) starts at n/N and decays by the ratio
    // (N-i-n+1)/(N-i) per step, hitting zero once fewer than n-1 larger
    // values remain.
    let mut probability = n as f64 / count as f64;
    let mut expectation = 0.0;
    for i in 1..=count {
        expectation += sorted_values[i - 1] * probability;
        if i < count {
            probability *= (count as f64 - i as f64 - n as f64 + 1.0) / (count - i) as f64;
        }
    }
    Ok(expectation)
}

/// Number of baseline evaluations charged by time `t`: at least one, at
/// most the space size, mapped through the mean evaluation cost.
fn baseline_draws_at(stats: &SpaceStats, t: f64) -> usize {
    let n = (t / stats.mean_eval_cost).floor();
    (n as usize).clamp(1, stats.value_distribution.len())
}

/// Analytic expected best objective of random search at time `t`.
pub fn baseline_value_at(stats: &SpaceStats, t: f64) -> f64 {
    expected_min_after_n(&stats.value_distribution, baseline_draws_at(stats, t))
        .expect("draw count is clamped into range")
}

/// Expected best-so-far objective of uniform random search without
/// replacement at each grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineCurve {
    grid: TimeGrid,
    values: Vec<f64>,
}

impl BaselineCurve {
    /// Wraps externally computed baseline values over a grid.
    pub fn from_values(grid: &TimeGrid, values: Vec<f64>) -> Result<Self, MethodologyError> {
        if values.len() != grid.len() {
            return Err(MethodologyError::GridMismatch(format!(
                "{} values for a {}-point grid",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Closed-form baseline over the grid, with time mapped through the mean
/// evaluation cost.
pub fn baseline_curve(cache: &TuningCache, grid: &TimeGrid) -> BaselineCurve {
    let stats = cache.stats();
    let values = grid
        .points()
        .iter()
        .map(|&t| baseline_value_at(stats, t))
        .collect();
    BaselineCurve {
        grid: grid.clone(),
        values,
    }
}

/// Monte Carlo cross-check of the analytic baseline: seeded random-search
/// simulations walking the true per-entry costs, averaged per grid point.
/// Before its first completed evaluation a simulation contributes its first
/// draw's objective, mirroring the analytic clamp to one draw.
pub fn baseline_curve_monte_carlo(
    cache: &TuningCache,
    grid: &TimeGrid,
    simulations: usize,
    seed: u64,
) -> BaselineCurve {
    assert!(simulations > 0, "need at least one simulation");
    let n = cache.space().constrained_size() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sums = vec![0.0f64; grid.len()];
    let mut order: Vec<usize> = (0..n).collect();
    for _ in 0..simulations {
        for i in 0..n.saturating_sub(1) {
            let j = rng.random_range(i..n);
            order.swap(i, j);
        }
        let first = cache.measurement_by_rank(order[0]).objective;
        let mut completed = 0usize;
        let mut clock = 0.0f64;
        let mut next_completion =
            clock + cache.measurement_by_rank(order[0]).eval_cost_seconds;
        let mut best = f64::INFINITY;
        for (idx, &t) in grid.points().iter().enumerate() {
            while completed < n && next_completion <= t {
                let m = cache.measurement_by_rank(order[completed]);
                best = best.min(m.objective);
                clock = next_completion;
                completed += 1;
                if completed < n {
                    next_completion =
                        clock + cache.measurement_by_rank(order[completed]).eval_cost_seconds;
                }
            }
            sums[idx] += if completed == 0 { first } else { best };
        }
    }
    let values = sums.into_iter().map(|s| s / simulations as f64).collect();
    BaselineCurve {
        grid: grid.clone(),
        values,
    }
}

/// Time for the analytic baseline to close `cutoff` of the median-to-optimum
/// distance, bisected to 1e-6 s over the step function of draw counts.
pub fn compute_budget(cache: &TuningCache, cutoff: f64) -> Result<f64, MethodologyError> {
    if cutoff.is_nan() || cutoff <= 0.0 || cutoff > 1.0 {
        return Err(MethodologyError::OutOfRange(format!(
            "cutoff must be in (0, 1], got {cutoff}"
        )));
    }
    let stats = cache.stats();
    if stats.median <= stats.optimum {
        return Err(MethodologyError::DegenerateSpace);
    }
    let target = stats.median - cutoff * (stats.median - stats.optimum);
    if baseline_value_at(stats, 0.0) <= target {
        // The very first expected draw already reaches the target; the time
        // of one evaluation is the smallest meaningful budget.
        return Ok(stats.mean_eval_cost);
    }
    let n = stats.value_distribution.len() as f64;
    let mut lo = 0.0f64;
    let mut hi = stats.mean_eval_cost * (n + 1.0);
    debug_assert!(baseline_value_at(stats, hi) <= target);
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if baseline_value_at(stats, mid) <= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Baseline-relative quality per grid point, averaged across repeated runs,
/// with the per-run curves retained for confidence intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct PerformanceCurve {
    values: Vec<f64>,
    per_run: Vec<Vec<f64>>,
}

impl PerformanceCurve {
    /// A flat curve, used when only summary scores are being combined.
    pub fn flat(score: f64, grid_len: usize, run_count: usize) -> Self {
        Self {
            values: vec![score; grid_len],
            per_run: vec![vec![score; grid_len]; run_count.max(1)],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn run_count(&self) -> usize {
        self.per_run.len()
    }

    pub fn per_run(&self) -> &[Vec<f64>] {
        &self.per_run
    }

    /// Mean curve value over the grid.
    pub fn score(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Per-run scores (mean over the grid of each run's curve).
    pub fn run_scores(&self) -> Vec<f64> {
        self.per_run
            .iter()
            .map(|run| run.iter().sum::<f64>() / run.len() as f64)
            .collect()
    }
}

/// Applies the baseline-relative normalization to repeated runs on one
/// space. Runs with no completed evaluation at a grid point contribute the
/// baseline value there (zero share). The mean best-so-far across runs is
/// normalized, not the mean of per-run normalizations; the two agree
/// algebraically and the per-run curves are kept for the confidence band.
pub fn performance_curve(
    traces: &[Trace],
    baseline: &BaselineCurve,
    optimum: f64,
) -> Result<PerformanceCurve, MethodologyError> {
    if traces.is_empty() {
        return Err(MethodologyError::OutOfRange("need at least one trace".into()));
    }
    for (idx, &s) in baseline.values().iter().enumerate() {
        if s == optimum {
            return Err(MethodologyError::DegenerateDenominator {
                time: baseline.grid().points()[idx],
            });
        }
    }
    let grid = baseline.grid();
    let mut best_matrix: Vec<Vec<f64>> = Vec::with_capacity(traces.len());
    for trace in traces {
        let mut row = Vec::with_capacity(grid.len());
        let mut best = f64::INFINITY;
        let mut events = trace.events().iter().peekable();
        let mut seen = false;
        for (idx, &t) in grid.points().iter().enumerate() {
            while let Some(e) = events.peek() {
                if e.completion_time <= t {
                    best = best.min(e.objective);
                    seen = true;
                    events.next();
                } else {
                    break;
                }
            }
            row.push(if seen { best } else { baseline.values()[idx] });
        }
        best_matrix.push(row);
    }

    let per_run: Vec<Vec<f64>> = best_matrix
        .iter()
        .map(|row| {
            row.iter()
                .zip(baseline.values())
                .map(|(&f, &s)| (s - f) / (s - optimum))
                .collect()
        })
        .collect();

    let runs = traces.len() as f64;
    let values = (0..grid.len())
        .map(|idx| {
            let mean_best =
                best_matrix.iter().map(|row| row[idx]).sum::<f64>() / runs;
            let s = baseline.values()[idx];
            (s - mean_best) / (s - optimum)
        })
        .collect();

    Ok(PerformanceCurve { values, per_run })
}

/// Cross-space aggregate: unweighted mean curve, its mean as the score, and
/// a 95% normal-approximation confidence band across runs.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateReport {
    pub aggregate_values: Vec<f64>,
    pub ci_half_widths: Vec<f64>,
    pub score: f64,
    pub per_space_scores: BTreeMap<String, f64>,
    pub run_count: usize,
    pub space_count: usize,
}

pub fn aggregate(
    curves: &BTreeMap<String, PerformanceCurve>,
) -> Result<AggregateReport, MethodologyError> {
    if curves.is_empty() {
        return Err(MethodologyError::GridMismatch("no curves to aggregate".into()));
    }
    let grid_len = curves.values().next().unwrap().values().len();
    let run_count = curves.values().next().unwrap().run_count();
    for (id, curve) in curves {
        if curve.values().len() != grid_len {
            return Err(MethodologyError::GridMismatch(format!(
                "curve {id:?} has {} grid points, expected {grid_len}",
                curve.values().len()
            )));
        }
        if curve.run_count() != run_count {
            return Err(MethodologyError::GridMismatch(format!(
                "curve {id:?} has {} runs, expected {run_count}",
                curve.run_count()
            )));
        }
    }

    let spaces = curves.len() as f64;
    let aggregate_values: Vec<f64> = (0..grid_len)
        .map(|idx| curves.values().map(|c| c.values()[idx]).sum::<f64>() / spaces)
        .collect();
    let score = aggregate_values.iter().sum::<f64>() / grid_len as f64;

    // Per-run aggregate curves feed the cross-run confidence band.
    let ci_half_widths: Vec<f64> = (0..grid_len)
        .map(|idx| {
            if run_count < 2 {
                return 0.0;
            }
            let run_means: Vec<f64> = (0..run_count)
                .map(|r| {
                    curves.values().map(|c| c.per_run()[r][idx]).sum::<f64>() / spaces
                })
                .collect();
            let mean = run_means.iter().sum::<f64>() / run_count as f64;
            let var = run_means
                .iter()
                .map(|m| (m - mean) * (m - mean))
                .sum::<f64>()
                / (run_count - 1) as f64;
            confidence_half_width(var.sqrt(), run_count).expect("run_count >= 2")
        })
        .collect();

    let per_space_scores = curves
        .iter()
        .map(|(id, c)| (id.clone(), c.score()))
        .collect();

    Ok(AggregateReport {
        aggregate_values,
        ci_half_widths,
        score,
        per_space_scores,
        run_count,
        space_count: curves.len(),
    })
}

/// Half-width of the 95% normal-approximation confidence interval.
pub fn confidence_half_width(stddev: f64, runs: usize) -> Result<f64, MethodologyError> {
    if runs < 2 {
        return Err(MethodologyError::OutOfRange(format!(
            "confidence interval needs at least 2 runs, got {runs}"
        )));
    }
    if stddev.is_nan() || stddev < 0.0 {
        return Err(MethodologyError::OutOfRange(format!(
            "standard deviation must be non-negative, got {stddev}"
        )));
    }
    Ok(1.96 * stddev / (runs as f64).sqrt())
}
