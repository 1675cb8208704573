//! Deterministic synthetic caches: desk-scale stand-ins for measured GPU
//! tuning data.

use super::{CacheError, Direction, TuningCache};
use crate::space::ParamValue;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Hard cap on the enumerated combination count for synthetic spaces.
pub const SYNTH_SIZE_LIMIT: u64 = 10_000_000;

/// Objective landscape of a synthetic cache.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthKind {
    /// 1 + sum of squared index distances to the center; unique optimum.
    Bowl,
    /// Bowl times seeded multiplicative noise in [1, 3), with roughly one
    /// tenth of the combinations excluded by a generated constraint.
    Rugged,
    /// Independent seeded values in [1, 100).
    UniformRandom,
}

impl SynthKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SynthKind::Bowl => "bowl",
            SynthKind::Rugged => "rugged",
            SynthKind::UniformRandom => "uniform_random",
        }
    }
}

impl std::str::FromStr for SynthKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bowl" => Ok(SynthKind::Bowl),
            "rugged" => Ok(SynthKind::Rugged),
            "uniform_random" => Ok(SynthKind::UniformRandom),
            other => Err(format!("unknown synthetic kind {other:?}")),
        }
    }
}

impl std::fmt::Display for SynthKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Generates a fully enumerated synthetic cache. Identical arguments yield
/// identical caches.
pub fn synth_cache(
    kind: SynthKind,
    dims: u32,
    points_per_dim: u32,
    seed: u64,
) -> Result<TuningCache, CacheError> {
    if dims < 1 {
        return Err(CacheError::InvalidRequest("dims must be at least 1".into()));
    }
    if points_per_dim < 2 {
        return Err(CacheError::InvalidRequest(
            "points_per_dim must be at least 2".into(),
        ));
    }
    let mut total: u64 = 1;
    for _ in 0..dims {
        total = total
            .checked_mul(points_per_dim as u64)
            .filter(|&t| t <= SYNTH_SIZE_LIMIT)
            .ok_or(CacheError::TooLarge {
                requested: u64::MAX,
                limit: SYNTH_SIZE_LIMIT,
            })?;
    }

    let dims = dims as usize;
    let points = points_per_dim as i64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let parameters: Vec<super::FileParameter> = (0..dims)
        .map(|d| super::FileParameter {
            name: format!("p{d}"),
            values: (0..points).map(ParamValue::Int).collect(),
        })
        .collect();

    // The rugged constraint knocks out the combinations whose seeded
    // weighted index sum falls on one residue mod 10, roughly a tenth of
    // the space. The first weight is coprime with 10 so residues spread.
    let constraints = match kind {
        SynthKind::Rugged => {
            let coprime = [1i64, 3, 7, 9];
            let mut weights = vec![coprime[rng.random_range(0..coprime.len())]];
            for _ in 1..dims {
                weights.push(rng.random_range(1..=9));
            }
            let residue: i64 = rng.random_range(0..10);
            let sum = weights
                .iter()
                .enumerate()
                .map(|(d, w)| format!("p{d}*{w}"))
                .collect::<Vec<_>>()
                .join(" + ");
            vec![(format!("({sum}) % 10 != {residue}"), weights, residue)]
        }
        _ => vec![],
    };

    let center = (points - 1) / 2;
    let mut entries = Vec::with_capacity(total as usize);
    let mut current = vec![0i64; dims];
    'outer: loop {
        let valid = match &constraints.first() {
            Some((_, weights, residue)) => {
                let s: i64 = current.iter().zip(weights).map(|(i, w)| i * w).sum();
                s % 10 != *residue
            }
            None => true,
        };
        let bowl = 1.0
            + current
                .iter()
                .map(|&i| ((i - center) * (i - center)) as f64)
                .sum::<f64>();
        let objective = match kind {
            SynthKind::Bowl => bowl,
            SynthKind::Rugged => bowl * rng.random_range(1.0..3.0),
            SynthKind::UniformRandom => rng.random_range(1.0..100.0),
        };
        let cost = rng.random_range(0.5..2.0);
        entries.push(super::FileEntry {
            config: current.iter().map(|&i| ParamValue::Int(i)).collect(),
            valid,
            objective: valid.then_some(objective),
            eval_cost_seconds: cost,
        });
        for d in (0..dims).rev() {
            current[d] += 1;
            if current[d] < points {
                continue 'outer;
            }
            current[d] = 0;
        }
        break;
    }

    let model = super::FileModel {
        schema_version: super::SCHEMA_VERSION.to_string(),
        metadata: super::FileMetadata {
            kernel_name: format!("{kind}_{dims}x{points_per_dim}"),
            device_name: "synthetic".to_string(),
            input_id: format!("seed{seed}"),
            objective: super::FileObjective {
                name: "simulated_cost".to_string(),
                direction: Direction::Min,
                unit: "arbitrary".to_string(),
            },
        },
        parameters,
        constraints: constraints.into_iter().map(|(src, _, _)| src).collect(),
        entries,
    };
    TuningCache::from_file_model(model)
}
