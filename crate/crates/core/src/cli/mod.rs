//! Command implementations behind the `atbench` binary: cache validation
//! and statistics, synthetic-space generation, and batch experiment
//! execution with CSV report emission.
//!
//! Exit code contract: 0 success, 2 data errors (broken or inconsistent
//! caches, degenerate spaces), 64 usage errors (bad arguments, missing
//! files, oversized synthesis requests).

pub mod experiment;

pub use experiment::{run_experiment, ExperimentConfig, RunArtifacts};

use crate::cache::{self, CacheError, ExpectedCounts, SynthKind};
use crate::methodology::{self, MethodologyError};
use crate::opt::OptError;
use std::fmt;
use std::path::Path;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<CacheError> for CliError {
    fn from(e: CacheError) -> Self {
        match e {
            CacheError::Io(_) | CacheError::TooLarge { .. } | CacheError::InvalidRequest(_) => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<OptError> for CliError {
    fn from(e: OptError) -> Self {
        match e {
            OptError::UnknownAlgorithm(_)
            | OptError::UnknownHyperparameter { .. }
            | OptError::InvalidHyperparameter { .. } => CliError::Usage(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<MethodologyError> for CliError {
    fn from(e: MethodologyError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(format!("i/o error: {e}"))
    }
}

/// Loads and fully validates a cache, optionally checking expected counts.
/// Returns the human-readable report.
pub fn cmd_validate(
    path: impl AsRef<Path>,
    expected: Option<ExpectedCounts>,
) -> Result<String, CliError> {
    let cache = cache::load_cache(path)?;
    let report = cache::validate_cache(&cache, expected);
    if report.is_clean() {
        Ok(format!("{report}\nok: cache {} is exhaustive", cache.cache_id()))
    } else {
        Err(CliError::Data(report.to_string()))
    }
}

/// Prints space statistics and the budget at the given cutoff.
pub fn cmd_stats(path: impl AsRef<Path>, cutoff: f64) -> Result<String, CliError> {
    let cache = cache::load_cache(path)?;
    let stats = cache.stats();
    let space = cache.space();
    let budget = match methodology::compute_budget(&cache, cutoff) {
        Ok(b) => format!("{b}"),
        Err(MethodologyError::DegenerateSpace) => "degenerate".to_string(),
        Err(e) => return Err(e.into()),
    };
    Ok(format!(
        "cache={}\ncartesian={} constrained={} dims={}\noptimum={} median={} mean_eval_cost={}\nbudget={budget} cutoff={cutoff}",
        cache.cache_id(),
        space.cartesian_size(),
        space.constrained_size(),
        space.dimension_count(),
        stats.optimum,
        stats.median,
        stats.mean_eval_cost,
    ))
}

/// Generates a synthetic cache and writes it to `out`.
pub fn cmd_gen_synthetic(
    kind: SynthKind,
    dims: u32,
    points: u32,
    seed: u64,
    out: impl AsRef<Path>,
) -> Result<String, CliError> {
    let cache = cache::synth_cache(kind, dims, points, seed)?;
    cache::write_cache(&cache, &out)?;
    Ok(format!(
        "wrote {} ({} of {} configurations valid)",
        out.as_ref().display(),
        cache.space().constrained_size(),
        cache.space().cartesian_size()
    ))
}

#[cfg(test)]
mod tests;
