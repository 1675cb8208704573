//! Generational genetic algorithm with tournament selection, uniform
//! crossover, per-gene mutation, elitism, and repair on every child.
//!
//! Reference comparator with fixed reasonable defaults.

use super::{parse_hyper, OptError, Optimizer};
use crate::sim::BudgetedEvaluator;
use crate::space::{crossover_uniform, Configuration, SearchSpace};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct GeneticAlgorithm {
    pub population: usize,
    pub tournament: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    pub elitism: usize,
}

impl Default for GeneticAlgorithm {
    fn default() -> Self {
        Self {
            population: 20,
            tournament: 2,
            crossover_prob: 0.9,
            mutation_prob: 0.1,
            elitism: 2,
        }
    }
}

impl GeneticAlgorithm {
    pub fn with_overrides(overrides: &[(String, String)]) -> Result<Self, OptError> {
        let mut ga = Self::default();
        for (name, value) in overrides {
            match name.as_str() {
                "population" => ga.population = parse_hyper(name, value)?,
                "tournament" => ga.tournament = parse_hyper(name, value)?,
                "crossover" => ga.crossover_prob = parse_hyper(name, value)?,
                "mutation" => ga.mutation_prob = parse_hyper(name, value)?,
                "elites" => ga.elitism = parse_hyper(name, value)?,
                _ => {
                    return Err(OptError::UnknownHyperparameter {
                        algorithm: "genetic_algorithm".into(),
                        name: name.clone(),
                    })
                }
            }
        }
        if ga.population < 2 {
            return Err(OptError::InvalidHyperparameter {
                name: "population".into(),
                message: "must be at least 2".into(),
            });
        }
        if ga.elitism >= ga.population {
            return Err(OptError::InvalidHyperparameter {
                name: "elites".into(),
                message: "must be smaller than the population".into(),
            });
        }
        if ga.tournament < 1 {
            return Err(OptError::InvalidHyperparameter {
                name: "tournament".into(),
                message: "must be at least 1".into(),
            });
        }
        Ok(ga)
    }

    fn tournament_pick<'p>(
        &self,
        population: &'p [(Configuration, f64)],
        rng: &mut ChaCha8Rng,
    ) -> &'p Configuration {
        let mut best: Option<&(Configuration, f64)> = None;
        for _ in 0..self.tournament {
            let cand = &population[rng.random_range(0..population.len())];
            if best.is_none_or(|b| cand.1 < b.1) {
                best = Some(cand);
            }
        }
        &best.unwrap().0
    }
}

impl Optimizer for GeneticAlgorithm {
    fn run(
        &self,
        ev: &mut BudgetedEvaluator,
        space: &SearchSpace,
        rng: &mut ChaCha8Rng,
    ) -> Result<Configuration, OptError> {
        let mut best: Option<(Configuration, f64)> = None;
        let track = |c: &Configuration, v: f64, best: &mut Option<(Configuration, f64)>| {
            if best.as_ref().is_none_or(|(_, b)| v < *b) {
                *best = Some((c.clone(), v));
            }
        };

        let mut population: Vec<(Configuration, f64)> = Vec::with_capacity(self.population);
        for _ in 0..self.population {
            if ev.should_stop() {
                break;
            }
            let c = space.random_valid(rng);
            let v = ev.evaluate(&c)?;
            track(&c, v, &mut best);
            population.push((c, v));
        }

        'generations: while !ev.should_stop() && !population.is_empty() {
            let mut ranked = population.clone();
            ranked.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
            let mut next: Vec<(Configuration, f64)> =
                ranked[..self.elitism.min(ranked.len())].to_vec();
            while next.len() < self.population {
                if ev.should_stop() {
                    break 'generations;
                }
                let p1 = self.tournament_pick(&population, rng).clone();
                let p2 = self.tournament_pick(&population, rng).clone();
                let mut child = if rng.random::<f64>() < self.crossover_prob {
                    crossover_uniform(&p1, &p2, rng)?
                } else {
                    p1
                };
                for d in 0..child.len() {
                    if rng.random::<f64>() < self.mutation_prob {
                        child.set(d, rng.random_range(0..space.domains()[d].len()) as u32);
                    }
                }
                let child = space.repair(&child);
                let v = ev.evaluate(&child)?;
                track(&child, v, &mut best);
                next.push((child, v));
            }
            population = next;
        }
        Ok(best.expect("positive budget admits one evaluation").0)
    }
}
