//! Tuning caches: exhaustive measurement data for one (kernel, device,
//! input) triple, loaded from JSON files or synthesized, plus the per-space
//! statistics derived from them.
//!
//! Objectives are normalized to minimization at load time; maximization
//! caches are negated internally and restored on write.

mod synth;

pub use synth::{synth_cache, SynthKind};

use crate::space::{
    enumerate_valid, parse_constraint, Configuration, ParamDomain, ParamValue, SearchSpace,
    SpaceError,
};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;
use thiserror::Error;

pub const SCHEMA_VERSION: &str = "1.0";

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("cannot access cache file: {0}")]
    Io(#[from] std::io::Error),
    #[error("cache format error: {0}")]
    Format(String),
    #[error("unsupported schema version {found:?} (expected {SCHEMA_VERSION:?})")]
    SchemaVersionMismatch { found: String },
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("duplicate entry for configuration {0}")]
    DuplicateEntry(String),
    #[error("missing entry for valid configuration {0}")]
    MissingEntry(String),
    #[error("entry validity contradicts the constraints for configuration {0}")]
    ConstraintMismatch(String),
    #[error("synthetic space of {requested} combinations exceeds the {limit} limit")]
    TooLarge { requested: u64, limit: u64 },
    #[error("invalid request: {0}")]
    InvalidRequest(String),
}

/// Optimization sense of the objective as recorded in the cache file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Min,
    Max,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheMetadata {
    pub kernel_name: String,
    pub device_name: String,
    pub input_id: String,
    pub objective_name: String,
    pub objective_direction: Direction,
    pub objective_unit: String,
}

impl CacheMetadata {
    /// Identifier of the (kernel, device, input) triple within an experiment.
    pub fn cache_id(&self) -> String {
        format!(
            "{}/{}/{}",
            self.kernel_name, self.device_name, self.input_id
        )
    }
}

/// Measurement of one valid configuration, normalized to minimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub objective: f64,
    pub eval_cost_seconds: f64,
}

/// Statistics of the valid objective values, after direction normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceStats {
    pub optimum: f64,
    pub median: f64,
    pub mean_eval_cost: f64,
    pub value_distribution: Vec<f64>,
}

/// An exhaustive map from valid configuration to measurement for one
/// (kernel, device, input) triple. Immutable after load.
#[derive(Debug, PartialEq)]
pub struct TuningCache {
    metadata: CacheMetadata,
    space: SearchSpace,
    /// One measurement per valid configuration, aligned with the valid set.
    measurements: Vec<Measurement>,
    /// Costs recorded in the file for constraint-violating configurations.
    invalid_entries: BTreeMap<Configuration, f64>,
    stats: SpaceStats,
}

impl TuningCache {
    pub fn metadata(&self) -> &CacheMetadata {
        &self.metadata
    }

    pub fn space(&self) -> &SearchSpace {
        &self.space
    }

    pub fn stats(&self) -> &SpaceStats {
        &self.stats
    }

    pub fn cache_id(&self) -> String {
        self.metadata.cache_id()
    }

    /// Measurement for a valid configuration.
    pub fn measurement(&self, c: &Configuration) -> Option<&Measurement> {
        self.space.valid_rank(c).map(|rank| &self.measurements[rank])
    }

    pub fn measurement_by_rank(&self, rank: usize) -> &Measurement {
        &self.measurements[rank]
    }

    pub fn invalid_entries(&self) -> &BTreeMap<Configuration, f64> {
        &self.invalid_entries
    }
}

// ---------------------------------------------------------------------------
// On-disk model

#[derive(Debug, Serialize, Deserialize)]
struct FileModel {
    schema_version: String,
    metadata: FileMetadata,
    parameters: Vec<FileParameter>,
    constraints: Vec<String>,
    entries: Vec<FileEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct FileMetadata {
    kernel_name: String,
    device_name: String,
    input_id: String,
    objective: FileObjective,
}

#[derive(Debug, Serialize, Deserialize)]
struct FileObjective {
    name: String,
    direction: Direction,
    unit: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct FileParameter {
    name: String,
    values: Vec<ParamValue>,
}

#[derive(Debug, Serialize, Deserialize)]
struct FileEntry {
    config: Vec<ParamValue>,
    valid: bool,
    objective: Option<f64>,
    eval_cost_seconds: f64,
}

fn describe_config(space: &SearchSpace, c: &Configuration) -> String {
    let pairs: Vec<String> = space
        .domains()
        .iter()
        .zip(c.indices())
        .map(|(d, &i)| format!("{}={}", d.name(), d.values()[i as usize]))
        .collect();
    format!("{} [{}]", c, pairs.join(", "))
}

/// Loads, constraint-checks, and exhaustiveness-verifies a cache file.
pub fn load_cache(path: impl AsRef<Path>) -> Result<TuningCache, CacheError> {
    let text = std::fs::read_to_string(path)?;
    parse_cache(&text)
}

/// Parses cache JSON from memory; same checks as [`load_cache`].
pub fn parse_cache(text: &str) -> Result<TuningCache, CacheError> {
    let model: FileModel =
        serde_json::from_str(text).map_err(|e| CacheError::Format(e.to_string()))?;
    TuningCache::from_file_model(model)
}

/// Writes the cache in the documented JSON format, entries sorted
/// lexicographically by configuration indices.
pub fn write_cache(cache: &TuningCache, path: impl AsRef<Path>) -> Result<(), CacheError> {
    let model = cache.to_file_model();
    let mut text = serde_json::to_string_pretty(&model)
        .map_err(|e| CacheError::Format(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

impl TuningCache {
    fn from_file_model(model: FileModel) -> Result<Self, CacheError> {
        if model.schema_version != SCHEMA_VERSION {
            return Err(CacheError::SchemaVersionMismatch {
                found: model.schema_version,
            });
        }
        if model.parameters.is_empty() {
            return Err(CacheError::Format("no parameters declared".into()));
        }
        let mut domains = Vec::with_capacity(model.parameters.len());
        for p in model.parameters {
            domains.push(ParamDomain::new(p.name, p.values)?);
        }
        let mut constraints = Vec::with_capacity(model.constraints.len());
        for source in &model.constraints {
            constraints.push(parse_constraint(source, &domains)?);
        }
        let space = enumerate_valid(domains, constraints)?;

        let direction = model.metadata.objective.direction;
        let sign = match direction {
            Direction::Min => 1.0,
            Direction::Max => -1.0,
        };

        let mut measurements: Vec<Option<Measurement>> =
            vec![None; space.constrained_size() as usize];
        let mut invalid_entries = BTreeMap::new();
        let mut seen: HashSet<Configuration> = HashSet::new();
        for entry in &model.entries {
            if entry.config.len() != space.dimension_count() {
                return Err(CacheError::Format(format!(
                    "entry has {} values but the space has {} parameters",
                    entry.config.len(),
                    space.dimension_count()
                )));
            }
            let mut indices = Vec::with_capacity(entry.config.len());
            for (d, value) in entry.config.iter().enumerate() {
                let domain = &space.domains()[d];
                match domain.index_of(value) {
                    Some(i) => indices.push(i),
                    None => {
                        return Err(CacheError::Format(format!(
                            "value {} is not in the domain of parameter {:?}",
                            value,
                            domain.name()
                        )))
                    }
                }
            }
            let config = Configuration::new(indices);
            if !seen.insert(config.clone()) {
                return Err(CacheError::DuplicateEntry(describe_config(&space, &config)));
            }
            if !entry.eval_cost_seconds.is_finite() || entry.eval_cost_seconds <= 0.0 {
                return Err(CacheError::Format(format!(
                    "entry {} has non-positive eval_cost_seconds {}",
                    describe_config(&space, &config),
                    entry.eval_cost_seconds
                )));
            }
            let rank = space.valid_rank(&config);
            if entry.valid != rank.is_some() {
                return Err(CacheError::ConstraintMismatch(describe_config(
                    &space, &config,
                )));
            }
            match rank {
                Some(rank) => {
                    let objective = match entry.objective {
                        Some(v) if v.is_finite() => v * sign,
                        Some(v) => {
                            return Err(CacheError::Format(format!(
                                "entry {} has non-finite objective {v}",
                                describe_config(&space, &config)
                            )))
                        }
                        None => {
                            return Err(CacheError::Format(format!(
                                "valid entry {} has no objective",
                                describe_config(&space, &config)
                            )))
                        }
                    };
                    measurements[rank] = Some(Measurement {
                        objective,
                        eval_cost_seconds: entry.eval_cost_seconds,
                    });
                }
                None => {
                    if entry.objective.is_some() {
                        return Err(CacheError::Format(format!(
                            "invalid entry {} carries an objective",
                            describe_config(&space, &config)
                        )));
                    }
                    invalid_entries.insert(config, entry.eval_cost_seconds);
                }
            }
        }

        let mut resolved = Vec::with_capacity(measurements.len());
        for (rank, m) in measurements.into_iter().enumerate() {
            match m {
                Some(m) => resolved.push(m),
                None => {
                    let config = &space.valid_set()[rank];
                    return Err(CacheError::MissingEntry(describe_config(&space, config)));
                }
            }
        }

        let stats = compute_stats(&resolved);
        Ok(TuningCache {
            metadata: CacheMetadata {
                kernel_name: model.metadata.kernel_name,
                device_name: model.metadata.device_name,
                input_id: model.metadata.input_id,
                objective_name: model.metadata.objective.name,
                objective_direction: direction,
                objective_unit: model.metadata.objective.unit,
            },
            space,
            measurements: resolved,
            invalid_entries,
            stats,
        })
    }

    fn to_file_model(&self) -> FileModel {
        let sign = match self.metadata.objective_direction {
            Direction::Min => 1.0,
            Direction::Max => -1.0,
        };
        let mut entries = Vec::with_capacity(
            self.measurements.len() + self.invalid_entries.len(),
        );
        let mut invalid = self.invalid_entries.iter().peekable();
        for (rank, config) in self.space.valid_set().iter().enumerate() {
            while invalid.peek().is_some_and(|(c, _)| *c < config) {
                let (c, &cost) = invalid.next().unwrap();
                entries.push(self.invalid_file_entry(c, cost));
            }
            let m = &self.measurements[rank];
            entries.push(FileEntry {
                config: self.space.values_of(config),
                valid: true,
                objective: Some(m.objective * sign),
                eval_cost_seconds: m.eval_cost_seconds,
            });
        }
        for (c, &cost) in invalid {
            entries.push(self.invalid_file_entry(c, cost));
        }
        FileModel {
            schema_version: SCHEMA_VERSION.to_string(),
            metadata: FileMetadata {
                kernel_name: self.metadata.kernel_name.clone(),
                device_name: self.metadata.device_name.clone(),
                input_id: self.metadata.input_id.clone(),
                objective: FileObjective {
                    name: self.metadata.objective_name.clone(),
                    direction: self.metadata.objective_direction,
                    unit: self.metadata.objective_unit.clone(),
                },
            },
            parameters: self
                .space
                .domains()
                .iter()
                .map(|d| FileParameter {
                    name: d.name().to_string(),
                    values: d.values().to_vec(),
                })
                .collect(),
            constraints: self
                .space
                .constraint_sources()
                .iter()
                .map(|s| s.to_string())
                .collect(),
            entries,
        }
    }

    fn invalid_file_entry(&self, c: &Configuration, cost: f64) -> FileEntry {
        FileEntry {
            config: self.space.values_of(c),
            valid: false,
            objective: None,
            eval_cost_seconds: cost,
        }
    }
}

fn compute_stats(measurements: &[Measurement]) -> SpaceStats {
    let mut values: Vec<f64> = measurements.iter().map(|m| m.objective).collect();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    let median = if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    };
    let mean_eval_cost =
        measurements.iter().map(|m| m.eval_cost_seconds).sum::<f64>() / n as f64;
    SpaceStats {
        optimum: values[0],
        median,
        mean_eval_cost,
        value_distribution: values,
    }
}

/// Recomputes the statistics of a cache's valid measurements.
pub fn space_stats(cache: &TuningCache) -> SpaceStats {
    compute_stats(&cache.measurements)
}

/// Table-style expected characteristics to check a cache against.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExpectedCounts {
    pub cartesian_size: Option<u64>,
    pub constrained_size: Option<u64>,
    pub dimensions: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub cartesian_size: u64,
    pub constrained_size: u64,
    pub dimensions: usize,
    pub mismatches: Vec<String>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.mismatches.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "cartesian={} constrained={} dims={}",
            self.cartesian_size, self.constrained_size, self.dimensions
        )?;
        for m in &self.mismatches {
            write!(f, "\nmismatch: {m}")?;
        }
        Ok(())
    }
}

/// Reports the cache's structural counts, flagging differences from
/// `expected` when provided.
pub fn validate_cache(cache: &TuningCache, expected: Option<ExpectedCounts>) -> ValidationReport {
    let cartesian_size = cache.space.cartesian_size();
    let constrained_size = cache.space.constrained_size();
    let dimensions = cache.space.dimension_count();
    let mut mismatches = Vec::new();
    if let Some(exp) = expected {
        if let Some(v) = exp.cartesian_size {
            if v != cartesian_size {
                mismatches.push(format!("cartesian size {cartesian_size} != expected {v}"));
            }
        }
        if let Some(v) = exp.constrained_size {
            if v != constrained_size {
                mismatches.push(format!(
                    "constrained size {constrained_size} != expected {v}"
                ));
            }
        }
        if let Some(v) = exp.dimensions {
            if v != dimensions {
                mismatches.push(format!("dimensions {dimensions} != expected {v}"));
            }
        }
    }
    ValidationReport {
        cartesian_size,
        constrained_size,
        dimensions,
        mismatches,
    }
}
