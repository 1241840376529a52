//! Checking descriptions, layouts and answers against each other.

mod score;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ascii::{scan_coordinates, AsciiError};
use crate::language::{parse_description, parse_query, Claim, LanguageError};
use crate::spatial::{relation_between, Direction, Entity, QueryType, Relation, SpatialError};

pub use score::{render_summary, score_predictions, InstanceVerdict, MetricsReport, ScoreError, TaskMode};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Grid(#[from] AsciiError),
    #[error(transparent)]
    Query(#[from] LanguageError),
    #[error("Queried object missing in grid")]
    MissingObject,
    #[error("unknown verify mode {0:?}")]
    UnknownMode(String),
}

/// Which side is taken as ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifyMode {
    /// The description is truth; the layout is judged.
    VerifyAscii,
    /// The layout is truth; the description is judged.
    VerifyDesc,
}

impl VerifyMode {
    pub fn as_str(self) -> &'static str {
        match self {
            VerifyMode::VerifyAscii => "verify_ascii",
            VerifyMode::VerifyDesc => "verify_desc",
        }
    }
}

impl fmt::Display for VerifyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VerifyMode {
    type Err = VerifyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [VerifyMode::VerifyAscii, VerifyMode::VerifyDesc]
            .into_iter()
            .find(|m| m.as_str() == s.trim())
            .ok_or_else(|| VerifyError::UnknownMode(s.to_string()))
    }
}

/// A claim the layout does not bear out.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimError {
    pub subject: Entity,
    pub object: Entity,
    pub claimed: Direction,
    /// The layout's direction, `"Missing"` or `"co-located"`.
    pub found: String,
}

pub const MISSING: &str = "Missing";
pub const CO_LOCATED: &str = "co-located";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentResult {
    pub pass: bool,
    pub acc: f64,
    pub correct: Vec<Claim>,
    pub errors: Vec<ClaimError>,
    pub bad_segments: Vec<String>,
    /// Entities in the layout that the description never mentions.
    pub extra_entities: Vec<Entity>,
}

pub fn evaluate_desc_vs_ascii(grid: &str, description: &str, mode: VerifyMode) -> Result<AlignmentResult, VerifyError> {
    let placement = scan_coordinates(grid)?.placement();
    let parsed = parse_description(description);
    let mut correct = Vec::new();
    let mut errors = Vec::new();
    for claim in &parsed.claims {
        let found = match relation_between(&placement, claim.subject, claim.object, QueryType::Full) {
            Ok(Relation::Dir(d)) if d == claim.direction => {
                correct.push(*claim);
                continue;
            }
            Ok(rel) => rel.as_str().to_string(),
            Err(SpatialError::CoLocated(..)) => CO_LOCATED.to_string(),
            Err(_) => MISSING.to_string(),
        };
        errors.push(ClaimError {
            subject: claim.subject,
            object: claim.object,
            claimed: claim.direction,
            found,
        });
    }
    let mentioned: BTreeSet<Entity> = parsed
        .claims
        .iter()
        .flat_map(|c| [c.subject, c.object])
        .collect();
    let extra_entities: Vec<Entity> = placement
        .coords()
        .keys()
        .filter(|e| !mentioned.contains(e))
        .copied()
        .collect();
    let n = parsed.claims.len();
    let acc = if n == 0 { 0.0 } else { correct.len() as f64 / n as f64 };
    let pass = match mode {
        VerifyMode::VerifyDesc => errors.is_empty(),
        VerifyMode::VerifyAscii => errors.is_empty() && parsed.bad_segments.is_empty() && extra_entities.is_empty(),
    };
    Ok(AlignmentResult {
        pass,
        acc,
        correct,
        errors,
        bad_segments: parsed.bad_segments,
        extra_entities,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsistencyResult {
    pub pass: bool,
    pub expected: String,
    pub actual: String,
}

/// Reads the queried relation off the grid and compares it with
/// `reference`, ignoring case. Pairs sharing a cell read as `"co-located"`.
pub fn evaluate_consistency(grid: &str, query: &str, reference: &str) -> Result<ConsistencyResult, VerifyError> {
    let (qt, x, y) = parse_query(query)?;
    let placement = scan_coordinates(grid)?.placement();
    if placement.get(x).is_none() || placement.get(y).is_none() {
        return Err(VerifyError::MissingObject);
    }
    let actual = match relation_between(&placement, x, y, qt) {
        Ok(rel) => rel.as_str().to_string(),
        Err(SpatialError::CoLocated(..)) => CO_LOCATED.to_string(),
        Err(_) => return Err(VerifyError::MissingObject),
    };
    Ok(ConsistencyResult {
        pass: actual.to_lowercase() == reference.trim().to_lowercase(),
        expected: reference.to_string(),
        actual,
    })
}
