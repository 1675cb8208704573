//! Uniform random search without replacement, the methodology's baseline.

use super::{OptError, Optimizer};
use crate::sim::BudgetedEvaluator;
use crate::space::{Configuration, SearchSpace};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub struct RandomSearch;

impl Optimizer for RandomSearch {
    fn run(
        &self,
        ev: &mut BudgetedEvaluator,
        space: &SearchSpace,
        rng: &mut ChaCha8Rng,
    ) -> Result<Configuration, OptError> {
        // Incremental Fisher-Yates over the valid set: a uniform draw
        // without replacement per step, stopping at budget exhaustion.
        let n = space.valid_set().len();
        let mut order: Vec<usize> = (0..n).collect();
        let mut best: Option<(Configuration, f64)> = None;
        for step in 0..n {
            if ev.should_stop() {
                break;
            }
            let j = rng.random_range(step..n);
            order.swap(step, j);
            let config = &space.valid_set()[order[step]];
            let objective = ev.evaluate(config)?;
            if best.as_ref().is_none_or(|(_, b)| objective < *b) {
                best = Some((config.clone(), objective));
            }
        }
        Ok(best.expect("at least one evaluation fits in a positive budget").0)
    }
}
