//! The budgeted simulated objective: serves cached measurements, advances a
//! simulated clock by each configuration's evaluation cost, memoizes
//! repeats at zero cost, and records the evaluation trace.

use crate::cache::TuningCache;
use crate::opt::{self, AlgorithmSpec, OptError};
use crate::space::Configuration;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("evaluated an infeasible configuration {0}")]
    InvalidConfiguration(String),
    #[error("no measurement for valid configuration {0}")]
    UnknownConfiguration(String),
}

/// One completed evaluation. Repeats of a memoized configuration record a
/// non-fresh event at the unchanged clock.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEvent {
    pub completion_time: f64,
    pub config: Configuration,
    pub objective: f64,
    pub fresh: bool,
}

/// Append-only evaluation record of one optimizer run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    run_id: u64,
    master_seed: u64,
    events: Vec<TraceEvent>,
}

impl Trace {
    pub fn new(run_id: u64, master_seed: u64) -> Self {
        Self {
            run_id,
            master_seed,
            events: Vec::new(),
        }
    }

    pub fn run_id(&self) -> u64 {
        self.run_id
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn events(&self) -> &[TraceEvent] {
        &self.events
    }

    pub fn push(&mut self, event: TraceEvent) {
        debug_assert!(
            self.events
                .last()
                .is_none_or(|prev| prev.completion_time <= event.completion_time),
            "events must complete in non-decreasing order"
        );
        self.events.push(event);
    }

    /// Newline-ready record lines: run id, completion time, config indices,
    /// objective, fresh flag.
    pub fn record_lines(&self) -> impl Iterator<Item = String> + '_ {
        self.events.iter().map(move |e| {
            let indices: Vec<String> = e.config.indices().iter().map(|i| i.to_string()).collect();
            format!(
                "{} {} {} {} {}",
                self.run_id,
                full_precision(e.completion_time),
                indices.join(";"),
                full_precision(e.objective),
                u8::from(e.fresh)
            )
        })
    }
}

/// Best objective among events completed by time `t`, if any.
pub fn best_so_far_at(trace: &Trace, t: f64) -> Option<f64> {
    let mut best: Option<f64> = None;
    for e in trace.events() {
        if e.completion_time > t {
            break;
        }
        best = Some(best.map_or(e.objective, |b: f64| b.min(e.objective)));
    }
    best
}

/// Full round-trip decimal formatting (17 significant digits) used for every
/// floating-point number the tool emits.
pub fn full_precision(v: f64) -> String {
    format!("{v:.16e}")
}

/// Cache-backed objective with a simulated clock and a hard time budget.
///
/// One evaluator per run; never shared.
#[derive(Debug)]
pub struct BudgetedEvaluator<'c> {
    cache: &'c TuningCache,
    budget_seconds: f64,
    spent_seconds: f64,
    memo: HashMap<Configuration, f64>,
    trace: Trace,
    rng_seed: u64,
    last_was_fresh: bool,
}

impl<'c> BudgetedEvaluator<'c> {
    pub fn new(cache: &'c TuningCache, budget_seconds: f64, run_id: u64, master_seed: u64) -> Self {
        assert!(
            budget_seconds > 0.0,
            "budget must be positive, got {budget_seconds}"
        );
        Self {
            cache,
            budget_seconds,
            spent_seconds: 0.0,
            memo: HashMap::new(),
            trace: Trace::new(run_id, master_seed),
            rng_seed: derive_run_seed(master_seed, run_id),
            last_was_fresh: false,
        }
    }

    pub fn cache(&self) -> &'c TuningCache {
        self.cache
    }

    pub fn budget_seconds(&self) -> f64 {
        self.budget_seconds
    }

    pub fn spent_seconds(&self) -> f64 {
        self.spent_seconds
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    pub fn into_trace(self) -> Trace {
        self.trace
    }

    /// True when the evaluation that just returned was a cache-clock-charged
    /// first evaluation rather than a memoized repeat.
    pub fn was_fresh(&self) -> bool {
        self.last_was_fresh
    }

    pub fn budget_spent_fraction(&self) -> f64 {
        self.spent_seconds / self.budget_seconds
    }

    pub fn out_of_budget(&self) -> bool {
        self.budget_spent_fraction() >= 1.0
    }

    /// Every valid configuration has been evaluated; only zero-cost repeats
    /// remain, so optimizers stop here as well as at budget exhaustion.
    pub fn fully_explored(&self) -> bool {
        self.memo.len() as u64 == self.cache.space().constrained_size()
    }

    pub fn should_stop(&self) -> bool {
        self.out_of_budget() || self.fully_explored()
    }

    /// Returns the cached objective of `c`. The first evaluation advances the
    /// clock by the entry's cost; repeats are free. Evaluations are atomic:
    /// one started before exhaustion runs to completion, so the spent
    /// fraction may end above 1. Callers check the budget before starting.
    pub fn evaluate(&mut self, c: &Configuration) -> Result<f64, EvalError> {
        if let Some(&objective) = self.memo.get(c) {
            self.last_was_fresh = false;
            self.trace.push(TraceEvent {
                completion_time: self.spent_seconds,
                config: c.clone(),
                objective,
                fresh: false,
            });
            return Ok(objective);
        }
        let rank = self
            .cache
            .space()
            .valid_rank(c)
            .ok_or_else(|| EvalError::InvalidConfiguration(c.to_string()))?;
        let m = self.cache.measurement_by_rank(rank);
        self.spent_seconds += m.eval_cost_seconds;
        self.memo.insert(c.clone(), m.objective);
        self.last_was_fresh = true;
        self.trace.push(TraceEvent {
            completion_time: self.spent_seconds,
            config: c.clone(),
            objective: m.objective,
            fresh: true,
        });
        Ok(m.objective)
    }
}

/// Seed for run `run_id` under `master_seed`. The mixing constant is the
/// 64-bit golden ratio so that alternate implementations can reproduce
/// traces: seed_i = master ^ (i * 0x9E3779B97F4A7C15).
pub fn derive_run_seed(master_seed: u64, run_id: u64) -> u64 {
    master_seed ^ run_id.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Runs one seeded optimizer run against a cache and returns the completed
/// trace. Identical inputs yield identical traces.
pub fn run_optimizer(
    algo: &AlgorithmSpec,
    cache: &TuningCache,
    budget_seconds: f64,
    master_seed: u64,
    run_id: u64,
) -> Result<Trace, OptError> {
    let optimizer = opt::build(algo)?;
    let mut ev = BudgetedEvaluator::new(cache, budget_seconds, run_id, master_seed);
    let mut rng = ChaCha8Rng::seed_from_u64(ev.rng_seed());
    optimizer.run(&mut ev, cache.space(), &mut rng)?;
    Ok(ev.into_trace())
}
