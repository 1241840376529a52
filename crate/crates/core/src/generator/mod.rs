//! Dataset generation: connected scene construction, query sampling and the
//! rejection-sampling balance gate.

mod build;
mod query;
mod run;
mod tracker;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ascii::AsciiFormat;
use crate::language::Terminology;
use crate::spatial::QueryType;

pub use build::{build_connected_graph, realize_placement, BuiltScene, MAX_STEP, PLACEMENT_ATTEMPTS};
pub use query::{sample_query, QueryPolicy, SampledQuery};
pub use run::{generate_dataset, Generator, Instance, MAX_CONSECUTIVE_REJECTIONS};
pub use tracker::{balance_gate, rejection_probability, DimCounts, Tracker};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("invalid build parameters: {0}")]
    Parameters(String),
    #[error("placement retries exhausted after {0} attempts")]
    RetryExhausted(usize),
    #[error("no uniquely answerable entity pair")]
    NoAnswerablePair,
    #[error("inconsistent constraints")]
    Inconsistent,
    #[error("no progress: {0} consecutive candidates rejected")]
    NoProgress(usize),
}

/// A category dimension the balance gate tracks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BalanceDim {
    QueryType,
    Terminology,
    NumComponents,
    Label,
}

impl BalanceDim {
    pub const ALL: [BalanceDim; 4] = [
        BalanceDim::QueryType,
        BalanceDim::Terminology,
        BalanceDim::NumComponents,
        BalanceDim::Label,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BalanceDim::QueryType => "query_type",
            BalanceDim::Terminology => "terminology",
            BalanceDim::NumComponents => "num_components",
            BalanceDim::Label => "label",
        }
    }
}

impl fmt::Display for BalanceDim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BalanceDim {
    type Err = GenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BalanceDim::ALL
            .into_iter()
            .find(|d| d.as_str() == s.trim())
            .ok_or_else(|| GenError::Config(format!("unknown balance dimension {s:?}")))
    }
}

/// Inclusive bounds of the component and relation counts.
pub const COMPONENT_BOUNDS: [usize; 2] = [2, 8];
pub const RELATION_BOUNDS: [usize; 2] = [1, 12];

/// Generation settings. Deserializes from a flat JSON object; missing keys
/// take defaults and unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenConfig {
    pub target_count: usize,
    pub component_range: [usize; 2],
    pub relation_range: [usize; 2],
    pub formats: Vec<AsciiFormat>,
    pub seed: u64,
    pub balance_dims: Vec<BalanceDim>,
    /// Multiplier `c` in the rejection probability `min(cap, c * delta^2)`.
    pub balance_strength: f64,
    pub reject_cap: f64,
    /// Target shares in [`Terminology::ALL`] order.
    pub terminology_weights: Vec<f64>,
    /// Target shares in [`QueryType::ALL`] order.
    pub query_type_weights: Vec<f64>,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            target_count: 1000,
            component_range: COMPONENT_BOUNDS,
            relation_range: RELATION_BOUNDS,
            formats: AsciiFormat::ALL.to_vec(),
            seed: 42,
            balance_dims: BalanceDim::ALL.to_vec(),
            balance_strength: 400.0,
            reject_cap: 0.9,
            terminology_weights: vec![1.0 / 7.0; 7],
            query_type_weights: vec![1.0 / 3.0; 3],
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<(), GenError> {
        let bad = |msg: String| Err(GenError::Config(msg));
        let [c_lo, c_hi] = self.component_range;
        let [r_lo, r_hi] = self.relation_range;
        if c_lo > c_hi || c_lo < COMPONENT_BOUNDS[0] || c_hi > COMPONENT_BOUNDS[1] {
            return bad(format!("component_range {:?} outside {COMPONENT_BOUNDS:?}", self.component_range));
        }
        if r_lo > r_hi || r_lo < RELATION_BOUNDS[0] || r_hi > RELATION_BOUNDS[1] {
            return bad(format!("relation_range {:?} outside {RELATION_BOUNDS:?}", self.relation_range));
        }
        for n in c_lo..=c_hi {
            if self.relation_bounds(n).is_none() {
                return bad(format!("no admissible relation count for {n} components"));
            }
        }
        check_weights("terminology_weights", &self.terminology_weights, Terminology::ALL.len())?;
        check_weights("query_type_weights", &self.query_type_weights, QueryType::ALL.len())?;
        if !(0.0..1.0).contains(&self.reject_cap) {
            return bad(format!("reject_cap {} not in [0, 1)", self.reject_cap));
        }
        if !(self.balance_strength >= 0.0 && self.balance_strength.is_finite()) {
            return bad(format!("balance_strength {} must be non-negative", self.balance_strength));
        }
        Ok(())
    }

    /// Inclusive relation-count range for `n` components: at least `n - 1`
    /// for connectivity, at most one edge per pair.
    pub fn relation_bounds(&self, n: usize) -> Option<(usize, usize)> {
        let lo = self.relation_range[0].max(n.saturating_sub(1));
        let hi = self.relation_range[1].min(n * n.saturating_sub(1) / 2);
        (lo <= hi).then_some((lo, hi))
    }
}

fn check_weights(name: &str, w: &[f64], len: usize) -> Result<(), GenError> {
    if w.len() != len {
        return Err(GenError::Config(format!("{name} needs {len} entries, got {}", w.len())));
    }
    if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(GenError::Config(format!("{name} has a negative or non-finite entry")));
    }
    let sum: f64 = w.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(GenError::Config(format!("{name} sums to {sum}, expected 1")));
    }
    Ok(())
}
