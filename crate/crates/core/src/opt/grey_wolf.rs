//! Population search guided by the three current best solutions, with
//! budget-scheduled neighborhood shaking, tabu blocking of repeats,
//! simulated-annealing acceptance under a budget-decayed temperature with
//! mild reheating, and partial reinitialization on stagnation.
//!
//! Per generation the population is sorted and the best three become the
//! leaders. Every other individual proposes a candidate by mixing each
//! parameter independently from the leaders or itself, optionally shaken by
//! a random-coordinate jump or a one-step neighborhood move (coarse moves
//! early in the budget, stricter ones later), repaired to the nearest valid
//! configuration, and re-sampled while it collides with the tabu list.

use super::{parse_hyper, sa_accept, NoopObserver, OptError, Optimizer, RunObserver, TabuList};
use crate::sim::BudgetedEvaluator;
use crate::space::{Configuration, NeighborhoodKind, SearchSpace};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveTabuGreyWolf {
    pub population: usize,
    /// Tabu length; defaults to three times the population.
    pub tabu_len: Option<usize>,
    pub shake_rate: f64,
    pub jump_rate: f64,
    pub stagnation_limit: usize,
    pub restart_ratio: f64,
    pub t0: f64,
    pub lambda: f64,
    pub t_min: f64,
}

impl Default for AdaptiveTabuGreyWolf {
    fn default() -> Self {
        Self {
            population: 8,
            tabu_len: None,
            shake_rate: 0.2,
            jump_rate: 0.15,
            stagnation_limit: 80,
            restart_ratio: 0.3,
            t0: 1.0,
            lambda: 5.0,
            t_min: 1e-4,
        }
    }
}

const REHEAT_CAP: f64 = 8.0;

impl AdaptiveTabuGreyWolf {
    pub fn with_overrides(overrides: &[(String, String)]) -> Result<Self, OptError> {
        let mut gw = Self::default();
        for (name, value) in overrides {
            match name.as_str() {
                "p" => gw.population = parse_hyper(name, value)?,
                "tabu" => gw.tabu_len = Some(parse_hyper(name, value)?),
                "shake" => gw.shake_rate = parse_hyper(name, value)?,
                "jump" => gw.jump_rate = parse_hyper(name, value)?,
                "tau" => gw.stagnation_limit = parse_hyper(name, value)?,
                "rho" => gw.restart_ratio = parse_hyper(name, value)?,
                "t0" => gw.t0 = parse_hyper(name, value)?,
                "lambda" => gw.lambda = parse_hyper(name, value)?,
                "t_min" => gw.t_min = parse_hyper(name, value)?,
                _ => {
                    return Err(OptError::UnknownHyperparameter {
                        algorithm: "adaptive_tabu_grey_wolf".into(),
                        name: name.clone(),
                    })
                }
            }
        }
        for (name, ok) in [
            ("p", gw.population >= 4),
            ("shake", (0.0..=1.0).contains(&gw.shake_rate)),
            ("jump", (0.0..=1.0).contains(&gw.jump_rate)),
            ("rho", (0.0..=1.0).contains(&gw.restart_ratio)),
            ("t0", gw.t0 > 0.0),
            ("lambda", gw.lambda >= 0.0),
            ("t_min", gw.t_min > 0.0),
        ] {
            if !ok {
                return Err(OptError::InvalidHyperparameter {
                    name: name.into(),
                    message: "out of range".into(),
                });
            }
        }
        Ok(gw)
    }

    pub fn effective_tabu_len(&self) -> usize {
        self.tabu_len.unwrap_or(3 * self.population)
    }

    /// Coarse moves for the first third of the budget, adjacent moves for
    /// the middle third, single-step moves afterwards.
    pub fn neighborhood_for_fraction(b: f64) -> NeighborhoodKind {
        if b < 1.0 / 3.0 {
            NeighborhoodKind::Hamming
        } else if b < 2.0 / 3.0 {
            NeighborhoodKind::Adjacent
        } else {
            NeighborhoodKind::StrictlyAdjacent
        }
    }

    pub fn temperature(&self, reheat: f64, budget_fraction: f64) -> f64 {
        (reheat * self.t0 * (-self.lambda * budget_fraction).exp()).max(self.t_min)
    }

    pub fn run_observed<O: RunObserver>(
        &self,
        ev: &mut BudgetedEvaluator,
        space: &SearchSpace,
        rng: &mut ChaCha8Rng,
        observer: &mut O,
    ) -> Result<Configuration, OptError> {
        let mut tabu = TabuList::new(self.effective_tabu_len());
        let mut best: Option<(Configuration, f64)> = None;
        // Reheating doubles on every stagnation restart (capped) and resets
        // whenever the global best improves.
        let mut reheat = 1.0f64;

        let mut population: Vec<(Configuration, f64)> = Vec::with_capacity(self.population);
        for _ in 0..self.population {
            if ev.should_stop() {
                break;
            }
            let c = space.random_valid(rng);
            let v = ev.evaluate(&c)?;
            if best.as_ref().is_none_or(|(_, b)| v < *b) {
                best = Some((c.clone(), v));
            }
            population.push((c, v));
        }

        let mut stagnation = 0usize;
        'outer: while !ev.should_stop() && population.len() >= 4 {
            population.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
            let leaders: [Configuration; 3] = [
                population[0].0.clone(),
                population[1].0.clone(),
                population[2].0.clone(),
            ];
            observer.generation_leaders([&leaders[0], &leaders[1], &leaders[2]]);
            let mut improved_this_generation = false;

            for slot in population.iter_mut().skip(3) {
                if ev.should_stop() {
                    break 'outer;
                }
                let base = slot.0.clone();
                let f_base = slot.1;

                // Leader-mixed proposal: each parameter copied from one of
                // the three leaders or the individual itself.
                let mut y = base.clone();
                for d in 0..y.len() {
                    let pick = rng.random_range(0..4);
                    if pick < 3 {
                        y.set(d, leaders[pick].get(d));
                    }
                }
                observer.proposal_mixed(&y, [&leaders[0], &leaders[1], &leaders[2]], &base);

                // Shaking: rarely, either jump one coordinate to that of a
                // fresh random valid sample or take one scheduled
                // neighborhood step from the (possibly infeasible) proposal.
                if rng.random::<f64>() < self.shake_rate {
                    if rng.random::<f64>() < self.jump_rate {
                        let sample = space.random_valid(rng);
                        let d = rng.random_range(0..y.len());
                        y.set(d, sample.get(d));
                    } else {
                        let kind = Self::neighborhood_for_fraction(ev.budget_spent_fraction());
                        let moves = space.scan_neighbors(&y, kind);
                        if !moves.is_empty() {
                            y = moves[rng.random_range(0..moves.len())].clone();
                        }
                    }
                }

                if !space.is_valid(&y) {
                    y = space.repair(&y);
                }

                // Tabu collisions re-sample with a single-coordinate change
                // when one exists, otherwise a fresh sample; after ten
                // failures the tabu point stands as a forced memoized repeat.
                let mut retries = 0;
                while tabu.contains(&y) && retries < 10 {
                    let neighbors = space.neighbors(&y, NeighborhoodKind::Hamming);
                    y = if neighbors.is_empty() {
                        space.random_valid(rng)
                    } else {
                        neighbors[rng.random_range(0..neighbors.len())].clone()
                    };
                    retries += 1;
                }

                if ev.should_stop() {
                    break 'outer;
                }
                let f_y = ev.evaluate(&y)?;
                if best.as_ref().is_none_or(|(_, b)| f_y < *b) {
                    best = Some((y.clone(), f_y));
                    reheat = 1.0;
                    improved_this_generation = true;
                }

                let delta = f_y - f_base;
                let b = ev.budget_spent_fraction();
                let temperature = self.temperature(reheat, b);
                observer.decayed_acceptance_test(temperature, b, reheat);
                if sa_accept(delta, temperature, rng) {
                    *slot = (y.clone(), f_y);
                    tabu.push(y);
                }
            }

            if improved_this_generation {
                stagnation = 0;
            } else {
                stagnation += 1;
            }

            if stagnation >= self.stagnation_limit {
                let count = (self.restart_ratio * self.population as f64).floor() as usize;
                observer.reinitialized(count);
                reheat = (reheat * 2.0).min(REHEAT_CAP);
                population.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
                let len = population.len();
                for slot in (len.saturating_sub(count)..len).rev() {
                    if ev.should_stop() {
                        break 'outer;
                    }
                    let c = space.random_valid(rng);
                    let v = ev.evaluate(&c)?;
                    if best.as_ref().is_none_or(|(_, b)| v < *b) {
                        best = Some((c.clone(), v));
                        reheat = 1.0;
                    }
                    population[slot] = (c, v);
                }
                stagnation = 0;
            }
        }

        Ok(best.expect("positive budget admits one evaluation").0)
    }
}

impl Optimizer for AdaptiveTabuGreyWolf {
    fn run(
        &self,
        ev: &mut BudgetedEvaluator,
        space: &SearchSpace,
        rng: &mut ChaCha8Rng,
    ) -> Result<Configuration, OptError> {
        self.run_observed(ev, space, rng, &mut NoopObserver)
    }
}
