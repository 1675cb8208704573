//! Single-state simulated annealing over the Hamming neighborhood.
//!
//! Reference comparator with fixed reasonable defaults; deltas are
//! normalized by the running observed objective range so the temperature
//! schedule is scale-free.

use super::{parse_hyper, sa_accept, OptError, Optimizer};
use crate::sim::BudgetedEvaluator;
use crate::space::{Configuration, NeighborhoodKind, SearchSpace};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedAnnealing {
    pub t0: f64,
    pub cooling: f64,
    pub restart_after: usize,
}

impl Default for SimulatedAnnealing {
    fn default() -> Self {
        Self {
            t0: 1.0,
            cooling: 0.995,
            restart_after: 150,
        }
    }
}

impl SimulatedAnnealing {
    pub fn with_overrides(overrides: &[(String, String)]) -> Result<Self, OptError> {
        let mut sa = Self::default();
        for (name, value) in overrides {
            match name.as_str() {
                "t0" => sa.t0 = parse_hyper(name, value)?,
                "cooling" => sa.cooling = parse_hyper(name, value)?,
                "restart" => sa.restart_after = parse_hyper(name, value)?,
                _ => {
                    return Err(OptError::UnknownHyperparameter {
                        algorithm: "simulated_annealing".into(),
                        name: name.clone(),
                    })
                }
            }
        }
        Ok(sa)
    }
}

impl Optimizer for SimulatedAnnealing {
    fn run(
        &self,
        ev: &mut BudgetedEvaluator,
        space: &SearchSpace,
        rng: &mut ChaCha8Rng,
    ) -> Result<Configuration, OptError> {
        let mut x = space.random_valid(rng);
        let mut f_x = ev.evaluate(&x)?;
        let mut best = (x.clone(), f_x);
        let mut observed_min = f_x;
        let mut observed_max = f_x;
        let mut temperature = self.t0;
        let mut non_improving = 0usize;

        while !ev.should_stop() {
            let neighbors = space.neighbors(&x, NeighborhoodKind::Hamming);
            let proposal = if neighbors.is_empty() {
                // Isolated point: jump to a fresh random configuration.
                space.random_valid(rng)
            } else {
                neighbors[rng.random_range(0..neighbors.len())].clone()
            };
            if ev.should_stop() {
                break;
            }
            let f_p = ev.evaluate(&proposal)?;
            observed_min = observed_min.min(f_p);
            observed_max = observed_max.max(f_p);
            // A positive delta implies two distinct observed values, so the
            // range is positive whenever it divides.
            let delta = f_p - f_x;
            let normalized = if delta > 0.0 {
                delta / (observed_max - observed_min)
            } else {
                delta
            };
            if sa_accept(normalized, temperature, rng) {
                x = proposal.clone();
                f_x = f_p;
            }
            if f_p < best.1 {
                best = (proposal, f_p);
                non_improving = 0;
            } else {
                non_improving += 1;
            }
            temperature *= self.cooling;
            if non_improving > self.restart_after {
                if ev.should_stop() {
                    break;
                }
                x = space.random_valid(rng);
                f_x = ev.evaluate(&x)?;
                observed_min = observed_min.min(f_x);
                observed_max = observed_max.max(f_x);
                if f_x < best.1 {
                    best = (x.clone(), f_x);
                }
                temperature = self.t0;
                non_improving = 0;
            }
        }
        Ok(best.0)
    }
}
