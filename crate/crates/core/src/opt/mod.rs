//! The optimizer suite behind one contract: every algorithm takes a budgeted
//! evaluator, a search space, and a seeded generator, evaluates only valid
//! configurations, and stops once the budget is spent (or the whole space is
//! memoized, after which evaluations are free and nothing can improve).

pub mod annealing;
pub mod genetic;
pub mod grey_wolf;
pub mod hybrid_vndx;
pub mod random_search;

pub use annealing::SimulatedAnnealing;
pub use genetic::GeneticAlgorithm;
pub use grey_wolf::AdaptiveTabuGreyWolf;
pub use hybrid_vndx::HybridVndx;
pub use random_search::RandomSearch;

use crate::sim::{BudgetedEvaluator, EvalError};
use crate::space::{hamming, Configuration, NeighborhoodKind, SearchSpace, SpaceError};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::VecDeque;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OptError {
    #[error("unknown algorithm {0:?}")]
    UnknownAlgorithm(String),
    #[error("algorithm {algorithm:?} has no hyperparameter {name:?}")]
    UnknownHyperparameter { algorithm: String, name: String },
    #[error("bad value for hyperparameter {name:?}: {message}")]
    InvalidHyperparameter { name: String, message: String },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// CLI-stable algorithm identifiers.
pub const ALGORITHM_NAMES: [&str; 5] = [
    "random_search",
    "simulated_annealing",
    "genetic_algorithm",
    "hybrid_vndx",
    "adaptive_tabu_grey_wolf",
];

/// An algorithm identifier plus hyperparameter overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmSpec {
    pub name: String,
    pub overrides: Vec<(String, String)>,
}

impl AlgorithmSpec {
    pub fn named(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            overrides: Vec::new(),
        }
    }
}

impl FromStr for AlgorithmSpec {
    type Err = String;

    /// Parses `name[,key=value...]`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.split(',');
        let name = parts.next().unwrap_or_default().trim().to_string();
        if name.is_empty() {
            return Err("empty algorithm name".into());
        }
        let mut overrides = Vec::new();
        for part in parts {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| format!("expected key=value, got {part:?}"))?;
            overrides.push((key.trim().to_string(), value.trim().to_string()));
        }
        Ok(Self { name, overrides })
    }
}

pub trait Optimizer {
    /// Runs until the budget is exhausted (or the space fully memoized) and
    /// returns the best configuration evaluated.
    fn run(
        &self,
        ev: &mut BudgetedEvaluator,
        space: &SearchSpace,
        rng: &mut ChaCha8Rng,
    ) -> Result<Configuration, OptError>;
}

/// Builds the named optimizer with overrides applied; rejects unknown names
/// and unknown hyperparameters.
pub fn build(spec: &AlgorithmSpec) -> Result<Box<dyn Optimizer>, OptError> {
    match spec.name.as_str() {
        "random_search" => {
            if let Some((name, _)) = spec.overrides.first() {
                return Err(OptError::UnknownHyperparameter {
                    algorithm: spec.name.clone(),
                    name: name.clone(),
                });
            }
            Ok(Box::new(RandomSearch))
        }
        "simulated_annealing" => Ok(Box::new(SimulatedAnnealing::with_overrides(
            &spec.overrides,
        )?)),
        "genetic_algorithm" => Ok(Box::new(GeneticAlgorithm::with_overrides(&spec.overrides)?)),
        "hybrid_vndx" => Ok(Box::new(HybridVndx::with_overrides(&spec.overrides)?)),
        "adaptive_tabu_grey_wolf" => Ok(Box::new(AdaptiveTabuGreyWolf::with_overrides(
            &spec.overrides,
        )?)),
        other => Err(OptError::UnknownAlgorithm(other.to_string())),
    }
}

pub(crate) fn parse_hyper<T: FromStr>(name: &str, value: &str) -> Result<T, OptError>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| OptError::InvalidHyperparameter {
        name: name.to_string(),
        message: format!("{e}"),
    })
}

// ---------------------------------------------------------------------------
// Shared optimizer state

/// Bounded FIFO of recently visited configurations.
#[derive(Debug)]
pub struct TabuList {
    entries: VecDeque<Configuration>,
    capacity: usize,
}

impl TabuList {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "tabu capacity must be positive");
        Self {
            entries: VecDeque::with_capacity(capacity),
            capacity,
        }
    }

    pub fn push(&mut self, c: Configuration) {
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back(c);
    }

    pub fn contains(&self, c: &Configuration) -> bool {
        self.entries.contains(c)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Bounded best-k set of distinct evaluated configurations; ties at the
/// boundary go to the earlier insertion.
#[derive(Debug)]
pub struct EliteHeap {
    entries: Vec<(Configuration, f64, u64)>,
    capacity: usize,
    next_seq: u64,
}

impl EliteHeap {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "elite capacity must be positive");
        Self {
            entries: Vec::with_capacity(capacity + 1),
            capacity,
            next_seq: 0,
        }
    }

    pub fn offer(&mut self, c: &Configuration, objective: f64) {
        if self.entries.iter().any(|(e, _, _)| e == c) {
            return;
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.entries.push((c.clone(), objective, seq));
        self.entries
            .sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.2.cmp(&b.2)));
        self.entries.truncate(self.capacity);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn members(&self) -> impl Iterator<Item = (&Configuration, f64)> {
        self.entries.iter().map(|(c, v, _)| (c, *v))
    }

    /// Two distinct elite configurations, uniformly chosen; None with fewer
    /// than two members.
    pub fn sample_pair(&self, rng: &mut impl Rng) -> Option<(&Configuration, &Configuration)> {
        if self.entries.len() < 2 {
            return None;
        }
        let i = rng.random_range(0..self.entries.len());
        let mut j = rng.random_range(0..self.entries.len() - 1);
        if j >= i {
            j += 1;
        }
        Some((&self.entries[i].0, &self.entries[j].0))
    }
}

/// Append-only record of fresh evaluations, insertion-ordered.
#[derive(Debug, Default)]
pub struct History {
    records: Vec<(Configuration, f64)>,
}

impl History {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, c: Configuration, objective: f64) {
        self.records.push((c, objective));
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[(Configuration, f64)] {
        &self.records
    }

    /// Lowest-objective record; earliest insertion wins ties.
    pub fn best(&self) -> Option<(&Configuration, f64)> {
        let mut best: Option<(&Configuration, f64)> = None;
        for (c, v) in &self.records {
            if best.is_none_or(|(_, bv)| *v < bv) {
                best = Some((c, *v));
            }
        }
        best
    }

    /// Tabu penalty scaled to the observed objective spread; a large
    /// fallback keeps tabu candidates dominated before the spread is known.
    pub fn range_penalty(&self) -> f64 {
        if self.records.len() < 2 {
            return 1e9;
        }
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for (_, v) in &self.records {
            min = min.min(*v);
            max = max.max(*v);
        }
        max - min
    }
}

/// Mean objective of the k history records nearest to `query` by Hamming
/// distance; ties at the cutoff distance go to earlier insertions. Fewer
/// than k records average them all; an empty history scores 0.
pub fn knn_predict(history: &History, query: &Configuration, k: usize) -> f64 {
    assert!(k >= 1, "k must be at least 1");
    let records = history.records();
    if records.is_empty() {
        return 0.0;
    }
    let mut order: Vec<(usize, usize)> = records
        .iter()
        .enumerate()
        .map(|(i, (c, _))| (hamming(c, query), i))
        .collect();
    order.sort_unstable();
    let take = k.min(records.len());
    order[..take].iter().map(|&(_, i)| records[i].1).sum::<f64>() / take as f64
}

/// Metropolis acceptance: always for non-positive deltas, otherwise with
/// probability exp(-delta / temperature). Non-positive deltas consume no
/// randomness.
pub fn sa_accept(delta: f64, temperature: f64, rng: &mut impl Rng) -> bool {
    debug_assert!(temperature > 0.0);
    delta <= 0.0 || rng.random::<f64>() < (-delta / temperature).exp()
}

pub const WEIGHT_MIN: f64 = 0.05;
pub const WEIGHT_MAX: f64 = 20.0;

/// One positive weight per neighborhood kind, clamped to
/// [WEIGHT_MIN, WEIGHT_MAX].
#[derive(Debug, Clone)]
pub struct NeighborhoodWeights {
    w: [f64; 3],
}

impl Default for NeighborhoodWeights {
    fn default() -> Self {
        Self { w: [1.0; 3] }
    }
}

impl NeighborhoodWeights {
    pub fn new() -> Self {
        Self::default()
    }

    fn slot(kind: NeighborhoodKind) -> usize {
        NeighborhoodKind::ALL
            .iter()
            .position(|&k| k == kind)
            .unwrap()
    }

    pub fn get(&self, kind: NeighborhoodKind) -> f64 {
        self.w[Self::slot(kind)]
    }

    pub fn scale(&mut self, kind: NeighborhoodKind, factor: f64) -> f64 {
        let slot = Self::slot(kind);
        self.w[slot] = (self.w[slot] * factor).clamp(WEIGHT_MIN, WEIGHT_MAX);
        self.w[slot]
    }
}

/// Kind selected with probability w[kind] / sum(w).
pub fn roulette_select(weights: &NeighborhoodWeights, rng: &mut impl Rng) -> NeighborhoodKind {
    let total: f64 = NeighborhoodKind::ALL.iter().map(|&k| weights.get(k)).sum();
    debug_assert!(total > 0.0);
    let mut u = rng.random::<f64>() * total;
    for kind in NeighborhoodKind::ALL {
        u -= weights.get(kind);
        if u < 0.0 {
            return kind;
        }
    }
    *NeighborhoodKind::ALL.last().unwrap()
}

/// Uniform sample of `count` distinct elements, in draw order.
pub(crate) fn sample_without_replacement<T: Clone>(
    items: &[T],
    count: usize,
    rng: &mut impl Rng,
) -> Vec<T> {
    let count = count.min(items.len());
    let mut indices: Vec<usize> = (0..items.len()).collect();
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let j = rng.random_range(i..indices.len());
        indices.swap(i, j);
        out.push(items[indices[i]].clone());
    }
    out
}

/// Hooks for white-box inspection of a run; every method defaults to a no-op.
#[allow(unused_variables)]
pub trait RunObserver {
    /// Neighborhood chosen by roulette at the start of an iteration.
    fn neighborhood_sampled(&mut self, kind: NeighborhoodKind) {}
    /// Metropolis test with the temperature in force and its outcome.
    fn acceptance_test(&mut self, temperature: f64, delta: f64, accepted: bool) {}
    /// Weight value after an accept/reject update.
    fn weight_updated(&mut self, kind: NeighborhoodKind, weight: f64) {}
    /// Stagnation restart.
    fn restarted(&mut self) {}
    /// Leaders after a generation sort, best first.
    fn generation_leaders(&mut self, leaders: [&Configuration; 3]) {}
    /// Leader-mixed proposal before shaking, with its sources.
    fn proposal_mixed(
        &mut self,
        proposal: &Configuration,
        leaders: [&Configuration; 3],
        base: &Configuration,
    ) {
    }
    /// Metropolis test under the budget-decayed temperature schedule.
    fn decayed_acceptance_test(&mut self, temperature: f64, budget_fraction: f64, reheat: f64) {}
    /// Count of worst individuals replaced at a stagnation restart.
    fn reinitialized(&mut self, count: usize) {}
}

/// Observer that records nothing.
pub struct NoopObserver;

impl RunObserver for NoopObserver {}
