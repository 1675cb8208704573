//! Constrained discrete search spaces: parameter domains, configurations,
//! constraint checking, enumeration, neighborhoods, repair, and the sampling
//! primitives the optimizers are built from.

mod constraint;

pub use constraint::{parse_constraint, ConstraintExpr};

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};
use thiserror::Error;

use rand::Rng;

/// A scalar parameter value as it appears in a space definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Bool(bool),
    Int(i64),
    Real(f64),
    Str(String),
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Bool(b) => write!(f, "{b}"),
            ParamValue::Int(i) => write!(f, "{i}"),
            ParamValue::Real(r) => write!(f, "{r}"),
            ParamValue::Str(s) => write!(f, "{s:?}"),
        }
    }
}

#[derive(Debug, Error)]
pub enum SpaceError {
    #[error("syntax error at byte {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("unknown parameter {name:?} in constraint")]
    UnknownParameter { name: String },
    #[error("type error: {0}")]
    Type(String),
    #[error("invalid domain {name:?}: {reason}")]
    InvalidDomain { name: String, reason: String },
    #[error("search space has no valid configuration")]
    EmptySpace,
    #[error("cartesian size exceeds the 64-bit combination limit")]
    TooLarge,
    #[error("configuration length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
}

/// One tunable parameter: a name and its ordered list of admissible values.
///
/// The value order is significant: index arithmetic on it defines the
/// adjacent neighborhoods.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamDomain {
    name: String,
    values: Vec<ParamValue>,
}

impl ParamDomain {
    pub fn new(name: impl Into<String>, values: Vec<ParamValue>) -> Result<Self, SpaceError> {
        let name = name.into();
        if values.is_empty() {
            return Err(SpaceError::InvalidDomain {
                name,
                reason: "domain must contain at least one value".into(),
            });
        }
        for v in &values {
            if let ParamValue::Real(r) = v {
                if !r.is_finite() {
                    return Err(SpaceError::InvalidDomain {
                        name,
                        reason: format!("non-finite value {r}"),
                    });
                }
            }
        }
        for (i, v) in values.iter().enumerate() {
            if values[..i].contains(v) {
                return Err(SpaceError::InvalidDomain {
                    name,
                    reason: format!("duplicate value {v}"),
                });
            }
        }
        Ok(Self { name, values })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn values(&self) -> &[ParamValue] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Position of `value` in this domain, if present.
    pub fn index_of(&self, value: &ParamValue) -> Option<u32> {
        self.values.iter().position(|v| v == value).map(|i| i as u32)
    }
}

/// A point in a search space: one value index per parameter, in declaration
/// order. Ordering is lexicographic on the index vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Configuration {
    indices: Vec<u32>,
}

impl Configuration {
    pub fn new(indices: Vec<u32>) -> Self {
        Self { indices }
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn get(&self, dim: usize) -> u32 {
        self.indices[dim]
    }

    pub fn set(&mut self, dim: usize, index: u32) {
        self.indices[dim] = index;
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, idx) in self.indices.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{idx}")?;
        }
        write!(f, ")")
    }
}

/// The three neighborhood shapes used by the optimizers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NeighborhoodKind {
    /// Exactly one parameter differs, by any amount.
    Hamming,
    /// Every parameter index differs by at most one, at least one differs.
    Adjacent,
    /// Exactly one parameter differs, by exactly one index step.
    StrictlyAdjacent,
}

impl NeighborhoodKind {
    pub const ALL: [NeighborhoodKind; 3] = [
        NeighborhoodKind::Hamming,
        NeighborhoodKind::Adjacent,
        NeighborhoodKind::StrictlyAdjacent,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            NeighborhoodKind::Hamming => "hamming",
            NeighborhoodKind::Adjacent => "adjacent",
            NeighborhoodKind::StrictlyAdjacent => "strictly_adjacent",
        }
    }
}

impl fmt::Display for NeighborhoodKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for NeighborhoodKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hamming" => Ok(NeighborhoodKind::Hamming),
            "adjacent" => Ok(NeighborhoodKind::Adjacent),
            "strictly_adjacent" => Ok(NeighborhoodKind::StrictlyAdjacent),
            other => Err(format!("unknown neighborhood kind {other:?}")),
        }
    }
}

type NeighborMemo = RwLock<HashMap<(Configuration, NeighborhoodKind), Arc<[Configuration]>>>;

/// A fully enumerated, constraint-filtered discrete search space.
///
/// Immutable after construction and safe to share across concurrent runs;
/// the neighbor memo is internally synchronized.
#[derive(Debug)]
pub struct SearchSpace {
    domains: Vec<ParamDomain>,
    constraints: Vec<ConstraintExpr>,
    valid_set: Vec<Configuration>,
    cartesian_size: u64,
    neighbor_memo: NeighborMemo,
}

impl PartialEq for SearchSpace {
    fn eq(&self, other: &Self) -> bool {
        self.domains == other.domains
            && self.constraint_sources() == other.constraint_sources()
            && self.valid_set == other.valid_set
    }
}

/// Enumerates all constraint-satisfying index combinations of `domains`,
/// in lexicographic order.
pub fn enumerate_valid(
    domains: Vec<ParamDomain>,
    constraints: Vec<ConstraintExpr>,
) -> Result<SearchSpace, SpaceError> {
    assert!(!domains.is_empty(), "a search space needs at least one domain");
    let mut cartesian_size: u64 = 1;
    for d in &domains {
        cartesian_size = cartesian_size
            .checked_mul(d.len() as u64)
            .ok_or(SpaceError::TooLarge)?;
    }

    let dims = domains.len();
    let mut valid_set = Vec::new();
    let mut current = vec![0u32; dims];
    // Odometer over the full Cartesian product; lexicographic by construction.
    'outer: loop {
        let cfg = Configuration::new(current.clone());
        if constraints
            .iter()
            .all(|c| c.evaluate(|d| &domains[d].values()[current[d] as usize]))
        {
            valid_set.push(cfg);
        }
        for d in (0..dims).rev() {
            current[d] += 1;
            if (current[d] as usize) < domains[d].len() {
                continue 'outer;
            }
            current[d] = 0;
        }
        break;
    }

    if valid_set.is_empty() {
        return Err(SpaceError::EmptySpace);
    }
    Ok(SearchSpace {
        domains,
        constraints,
        valid_set,
        cartesian_size,
        neighbor_memo: RwLock::new(HashMap::new()),
    })
}

impl SearchSpace {
    pub fn domains(&self) -> &[ParamDomain] {
        &self.domains
    }

    pub fn constraints(&self) -> &[ConstraintExpr] {
        &self.constraints
    }

    pub fn constraint_sources(&self) -> Vec<&str> {
        self.constraints.iter().map(|c| c.source()).collect()
    }

    pub fn dimension_count(&self) -> usize {
        self.domains.len()
    }

    pub fn cartesian_size(&self) -> u64 {
        self.cartesian_size
    }

    pub fn constrained_size(&self) -> u64 {
        self.valid_set.len() as u64
    }

    pub fn valid_set(&self) -> &[Configuration] {
        &self.valid_set
    }

    /// Rank of `c` in the sorted valid set, if `c` is valid.
    pub fn valid_rank(&self, c: &Configuration) -> Option<usize> {
        self.valid_set.binary_search(c).ok()
    }

    /// The parameter values selected by `c`, in declaration order.
    pub fn values_of(&self, c: &Configuration) -> Vec<ParamValue> {
        c.indices()
            .iter()
            .enumerate()
            .map(|(d, &i)| self.domains[d].values()[i as usize].clone())
            .collect()
    }

    /// True iff every constraint holds on the values selected by `c`.
    pub fn is_valid(&self, c: &Configuration) -> bool {
        debug_assert_eq!(c.len(), self.domains.len());
        debug_assert!(c
            .indices()
            .iter()
            .zip(&self.domains)
            .all(|(&i, d)| (i as usize) < d.len()));
        self.constraints
            .iter()
            .all(|expr| expr.evaluate(|d| &self.domains[d].values()[c.get(d) as usize]))
    }

    /// All valid neighbors of `c` under `kind`, sorted lexicographically,
    /// `c` itself excluded. Memoized per (configuration, kind).
    pub fn neighbors(&self, c: &Configuration, kind: NeighborhoodKind) -> Arc<[Configuration]> {
        let key = (c.clone(), kind);
        if let Some(hit) = self.neighbor_memo.read().unwrap().get(&key) {
            return Arc::clone(hit);
        }
        let computed: Arc<[Configuration]> = self.scan_neighbors(c, kind).into();
        let mut memo = self.neighbor_memo.write().unwrap();
        Arc::clone(memo.entry(key).or_insert(computed))
    }

    /// Neighbor scan relative to an arbitrary in-range center; the center
    /// need not be valid and the result is not memoized.
    pub(crate) fn scan_neighbors(
        &self,
        center: &Configuration,
        kind: NeighborhoodKind,
    ) -> Vec<Configuration> {
        self.valid_set
            .iter()
            .filter(|cand| matches_kind(center, cand, kind))
            .cloned()
            .collect()
    }

    /// A uniformly distributed member of the valid set.
    pub fn random_valid(&self, rng: &mut impl Rng) -> Configuration {
        let i = rng.random_range(0..self.valid_set.len());
        self.valid_set[i].clone()
    }

    /// Nearest valid configuration by Hamming distance; ties go to the
    /// lexicographically smallest index vector. Valid inputs come back
    /// unchanged.
    pub fn repair(&self, c: &Configuration) -> Configuration {
        if self.is_valid(c) {
            return c.clone();
        }
        let mut best: Option<(usize, &Configuration)> = None;
        for cand in &self.valid_set {
            let d = hamming(c, cand);
            // Strict improvement only: the first candidate at the minimum
            // distance is the lexicographic winner because valid_set is sorted.
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, cand));
            }
        }
        best.expect("valid set is non-empty").1.clone()
    }
}

fn matches_kind(center: &Configuration, cand: &Configuration, kind: NeighborhoodKind) -> bool {
    match kind {
        NeighborhoodKind::Hamming => {
            let mut diffs = 0;
            for (a, b) in center.indices().iter().zip(cand.indices()) {
                if a != b {
                    diffs += 1;
                    if diffs > 1 {
                        return false;
                    }
                }
            }
            diffs == 1
        }
        NeighborhoodKind::Adjacent => {
            let mut any = false;
            for (&a, &b) in center.indices().iter().zip(cand.indices()) {
                let delta = (a as i64 - b as i64).abs();
                if delta > 1 {
                    return false;
                }
                if delta == 1 {
                    any = true;
                }
            }
            any
        }
        NeighborhoodKind::StrictlyAdjacent => {
            let mut step_diffs = 0;
            for (&a, &b) in center.indices().iter().zip(cand.indices()) {
                let delta = (a as i64 - b as i64).abs();
                if delta > 1 {
                    return false;
                }
                if delta == 1 {
                    step_diffs += 1;
                    if step_diffs > 1 {
                        return false;
                    }
                }
            }
            step_diffs == 1
        }
    }
}

/// Number of positions at which `a` and `b` differ.
pub fn hamming_distance(a: &Configuration, b: &Configuration) -> Result<usize, SpaceError> {
    if a.len() != b.len() {
        return Err(SpaceError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(hamming(a, b))
}

pub(crate) fn hamming(a: &Configuration, b: &Configuration) -> usize {
    debug_assert_eq!(a.len(), b.len());
    a.indices()
        .iter()
        .zip(b.indices())
        .filter(|(x, y)| x != y)
        .count()
}

/// Child with each position drawn uniformly from the corresponding parent
/// positions. The caller repairs the result.
pub fn crossover_uniform(
    a: &Configuration,
    b: &Configuration,
    rng: &mut impl Rng,
) -> Result<Configuration, SpaceError> {
    if a.len() != b.len() {
        return Err(SpaceError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let indices = a
        .indices()
        .iter()
        .zip(b.indices())
        .map(|(&x, &y)| if rng.random::<bool>() { x } else { y })
        .collect();
    Ok(Configuration::new(indices))
}

#[cfg(test)]
mod tests;
