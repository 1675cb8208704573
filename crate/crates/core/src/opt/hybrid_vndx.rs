//! Variable neighborhood descent hybridized with dynamic neighborhood
//! weighting, a light k-NN surrogate for candidate pre-screening, elite
//! recombination, tabu penalties, and simulated-annealing acceptance.
//!
//! Per iteration: a neighborhood is sampled by roulette over adaptive
//! weights; a candidate pool is built from sampled neighbors of the current
//! point, one repaired elite-crossover child, and random valid fills; each
//! candidate is scored by the k-NN surrogate plus a tabu penalty; the
//! lowest-scored candidate is evaluated and accepted by the Metropolis
//! rule. Accepting scales the sampled neighborhood's weight by 1.1,
//! rejecting by 0.9 (clamped). The temperature cools geometrically and is
//! reset on stagnation restarts.

use super::{
    knn_predict, parse_hyper, roulette_select, sa_accept, sample_without_replacement, EliteHeap,
    History, NeighborhoodWeights, NoopObserver, OptError, Optimizer, RunObserver, TabuList,
};
use crate::sim::BudgetedEvaluator;
use crate::space::{crossover_uniform, Configuration, SearchSpace};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct HybridVndx {
    pub k: usize,
    pub pool: usize,
    pub restart_after: usize,
    pub tabu_capacity: usize,
    pub elite_capacity: usize,
    pub t0: f64,
    pub cooling: f64,
}

impl Default for HybridVndx {
    fn default() -> Self {
        Self {
            k: 5,
            pool: 8,
            restart_after: 100,
            tabu_capacity: 300,
            elite_capacity: 5,
            t0: 1.0,
            cooling: 0.995,
        }
    }
}

impl HybridVndx {
    pub fn with_overrides(overrides: &[(String, String)]) -> Result<Self, OptError> {
        let mut hv = Self::default();
        for (name, value) in overrides {
            match name.as_str() {
                "k" => hv.k = parse_hyper(name, value)?,
                "pool" => hv.pool = parse_hyper(name, value)?,
                "restart" => hv.restart_after = parse_hyper(name, value)?,
                "tabu" => hv.tabu_capacity = parse_hyper(name, value)?,
                "elites" => hv.elite_capacity = parse_hyper(name, value)?,
                "t0" => hv.t0 = parse_hyper(name, value)?,
                "cooling" => hv.cooling = parse_hyper(name, value)?,
                _ => {
                    return Err(OptError::UnknownHyperparameter {
                        algorithm: "hybrid_vndx".into(),
                        name: name.clone(),
                    })
                }
            }
        }
        for (name, ok) in [
            ("k", hv.k >= 1),
            ("pool", hv.pool >= 1),
            ("tabu", hv.tabu_capacity >= 1),
            ("elites", hv.elite_capacity >= 1),
            ("t0", hv.t0 > 0.0),
            ("cooling", hv.cooling > 0.0 && hv.cooling <= 1.0),
        ] {
            if !ok {
                return Err(OptError::InvalidHyperparameter {
                    name: name.into(),
                    message: "out of range".into(),
                });
            }
        }
        Ok(hv)
    }

    pub fn run_observed<O: RunObserver>(
        &self,
        ev: &mut BudgetedEvaluator,
        space: &SearchSpace,
        rng: &mut ChaCha8Rng,
        observer: &mut O,
    ) -> Result<Configuration, OptError> {
        let mut history = History::new();
        let mut elites = EliteHeap::new(self.elite_capacity);
        let mut tabu = TabuList::new(self.tabu_capacity);
        let mut weights = NeighborhoodWeights::new();

        let mut x = space.random_valid(rng);
        let mut f_x = ev.evaluate(&x)?;
        if ev.was_fresh() {
            history.push(x.clone(), f_x);
        }
        elites.offer(&x, f_x);
        let mut best = (x.clone(), f_x);
        // Temperature comes from the closed form t0 * cooling^n with n the
        // iteration count since the last restart.
        let mut iterations_since_restart: u32 = 0;
        let mut non_improving = 0usize;

        while !ev.should_stop() {
            let kind = roulette_select(&weights, rng);
            observer.neighborhood_sampled(kind);

            // Pool: sampled neighbors, one elite-crossover child, random fills.
            let neighbors = space.neighbors(&x, kind);
            let mut pool = sample_without_replacement(
                &neighbors,
                self.pool.saturating_sub(2),
                rng,
            );
            if let Some((a, b)) = elites.sample_pair(rng) {
                let child = crossover_uniform(a, b, rng)?;
                pool.push(space.repair(&child));
            }
            while pool.len() < self.pool {
                pool.push(space.random_valid(rng));
            }

            let penalty = history.range_penalty();
            let mut chosen = 0usize;
            let mut chosen_score = f64::INFINITY;
            for (i, cand) in pool.iter().enumerate() {
                let mut score = knn_predict(&history, cand, self.k);
                if tabu.contains(cand) {
                    score += penalty;
                }
                if score < chosen_score {
                    chosen_score = score;
                    chosen = i;
                }
            }
            let candidate = pool.swap_remove(chosen);

            if ev.should_stop() {
                break;
            }
            let f_c = ev.evaluate(&candidate)?;
            if ev.was_fresh() {
                history.push(candidate.clone(), f_c);
            }
            elites.offer(&candidate, f_c);
            debug_assert!(
                elites_match_history_replay(&elites, &history, self.elite_capacity),
                "elite heap diverged from the k-best history replay"
            );

            let temperature = self.t0 * self.cooling.powi(iterations_since_restart as i32);
            let delta = f_c - f_x;
            let accepted = sa_accept(delta, temperature, rng);
            observer.acceptance_test(temperature, delta, accepted);
            if accepted {
                x = candidate.clone();
                f_x = f_c;
                tabu.push(x.clone());
                observer.weight_updated(kind, weights.scale(kind, 1.1));
            } else {
                observer.weight_updated(kind, weights.scale(kind, 0.9));
            }
            iterations_since_restart += 1;

            if f_c < best.1 {
                best = (candidate, f_c);
                non_improving = 0;
            } else {
                non_improving += 1;
            }

            if non_improving > self.restart_after {
                if ev.should_stop() {
                    break;
                }
                observer.restarted();
                x = space.random_valid(rng);
                f_x = ev.evaluate(&x)?;
                if ev.was_fresh() {
                    history.push(x.clone(), f_x);
                }
                elites.offer(&x, f_x);
                if f_x < best.1 {
                    best = (x.clone(), f_x);
                }
                iterations_since_restart = 0;
                non_improving = 0;
            }
        }

        debug_assert_eq!(
            history.best().map(|(c, _)| c.clone()),
            Some(best.0.clone()),
            "tracked best must match the history replay"
        );
        Ok(best.0)
    }
}

impl Optimizer for HybridVndx {
    fn run(
        &self,
        ev: &mut BudgetedEvaluator,
        space: &SearchSpace,
        rng: &mut ChaCha8Rng,
    ) -> Result<Configuration, OptError> {
        self.run_observed(ev, space, rng, &mut NoopObserver)
    }
}

/// Debug check: the elite heap must equal the k lowest-objective distinct
/// configurations of a history replay, ties to the earlier insertion.
#[cfg(debug_assertions)]
fn elites_match_history_replay(elites: &EliteHeap, history: &History, k: usize) -> bool {
    let mut replay: Vec<(&Configuration, f64, usize)> = Vec::new();
    for (idx, (c, v)) in history.records().iter().enumerate() {
        if !replay.iter().any(|(rc, _, _)| *rc == c) {
            replay.push((c, *v, idx));
        }
    }
    replay.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.2.cmp(&b.2)));
    replay.truncate(k);
    elites.len() == replay.len()
        && elites
            .members()
            .zip(&replay)
            .all(|((ec, ev), (rc, rv, _))| ec == *rc && ev == *rv)
}

#[cfg(not(debug_assertions))]
fn elites_match_history_replay(_: &EliteHeap, _: &History, _: usize) -> bool {
    true
}
