//! Description synthesis and parsing over a fixed phrase inventory, query
//! templates, and answer alias matching.

mod aliases;
mod lexicon;

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rand::seq::IndexedRandom;
use rand::Rng;
use regex::Regex;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::spatial::{Edge, Entity, QueryType};

pub use aliases::{aliases, normalize_answer, relation_alias_match};
pub use lexicon::{clock_direction, Lexicon, Template};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LanguageError {
    #[error("Query parsing failed: {0:?}")]
    QueryParse(String),
    #[error("unknown terminology {0:?}")]
    UnknownTerminology(String),
    #[error("lexicon: {0}")]
    Lexicon(String),
}

/// A parsed relation statement: `subject` lies in `direction` of `object`.
pub type Claim = Edge;

/// One lexical family of relation phrases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    Spatial,
    Cardinal,
    Clock,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Spatial, Family::Cardinal, Family::Clock];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Spatial => "spatial",
            Family::Cardinal => "cardinal",
            Family::Clock => "clock",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = LanguageError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .into_iter()
            .find(|f| f.as_str() == s.trim())
            .ok_or_else(|| LanguageError::UnknownTerminology(s.to_string()))
    }
}

/// Which families a description draws its phrases from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Terminology {
    Spatial,
    Cardinal,
    Clock,
    SpatialCardinal,
    SpatialClock,
    CardinalClock,
    SpatialCardinalClock,
}

impl Terminology {
    pub const ALL: [Terminology; 7] = [
        Terminology::Spatial,
        Terminology::Cardinal,
        Terminology::Clock,
        Terminology::SpatialCardinal,
        Terminology::SpatialClock,
        Terminology::CardinalClock,
        Terminology::SpatialCardinalClock,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Terminology::Spatial => "spatial",
            Terminology::Cardinal => "cardinal",
            Terminology::Clock => "clock",
            Terminology::SpatialCardinal => "spatial+cardinal",
            Terminology::SpatialClock => "spatial+clock",
            Terminology::CardinalClock => "cardinal+clock",
            Terminology::SpatialCardinalClock => "spatial+cardinal+clock",
        }
    }

    pub fn families(self) -> &'static [Family] {
        use Family::*;
        match self {
            Terminology::Spatial => &[Spatial],
            Terminology::Cardinal => &[Cardinal],
            Terminology::Clock => &[Clock],
            Terminology::SpatialCardinal => &[Spatial, Cardinal],
            Terminology::SpatialClock => &[Spatial, Clock],
            Terminology::CardinalClock => &[Cardinal, Clock],
            Terminology::SpatialCardinalClock => &[Spatial, Cardinal, Clock],
        }
    }
}

impl fmt::Display for Terminology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Terminology {
    type Err = LanguageError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace(' ', "");
        Terminology::ALL
            .into_iter()
            .find(|t| t.as_str() == key)
            .ok_or_else(|| LanguageError::UnknownTerminology(s.to_string()))
    }
}

impl Serialize for Terminology {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Terminology {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// One sentence per edge, in order. Each sentence's family is drawn
/// uniformly from the terminology's families, then a template uniformly
/// within that family.
pub fn synthesize_description<R: Rng + ?Sized>(edge_order: &[Edge], terminology: Terminology, rng: &mut R) -> String {
    let lexicon = Lexicon::builtin();
    edge_order
        .iter()
        .map(|edge| {
            let family = *terminology.families().choose(rng).expect("non-empty family set");
            let templates: Vec<&Template> = lexicon.templates_for(edge.direction, family).collect();
            let template = templates.choose(rng).expect("lexicon covers every direction");
            format!("{} {} {}.", edge.subject, template.phrase, edge.object)
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Result of parsing free text into relation claims.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ParsedDescription {
    pub claims: Vec<Claim>,
    /// Non-empty segments that matched no template, trimmed.
    pub bad_segments: Vec<String>,
}

fn sentence_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^([A-Z])\s+(.+?)\s+([A-Z])$").expect("valid regex"))
}

fn match_claim(segment: &str) -> Option<Claim> {
    let caps = sentence_pattern().captures(segment.trim())?;
    let subject = Entity::new(caps[1].chars().next()?).ok()?;
    let object = Entity::new(caps[3].chars().next()?).ok()?;
    if subject == object {
        return None;
    }
    let direction = Lexicon::builtin().lookup(&caps[2])?;
    Some(Claim::new(subject, direction, object))
}

/// Splits on `.` and `,` and matches each segment against the lexicon.
///
/// A segment that fails to match is retried once joined with its successor,
/// so a stray comma inside a relation phrase does not lose the claim.
pub fn parse_description(text: &str) -> ParsedDescription {
    let segments: Vec<&str> = text
        .split(['.', ','])
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    let mut out = ParsedDescription::default();
    let mut i = 0;
    while i < segments.len() {
        if let Some(claim) = match_claim(segments[i]) {
            out.claims.push(claim);
            i += 1;
            continue;
        }
        if let Some(next) = segments.get(i + 1) {
            if let Some(claim) = match_claim(&format!("{} {}", segments[i], next)) {
                out.claims.push(claim);
                i += 2;
                continue;
            }
        }
        out.bad_segments.push(segments[i].to_string());
        i += 1;
    }
    out
}

/// Query text for asking where `x` is relative to `y`.
pub fn query_text(qt: QueryType, x: Entity, y: Entity) -> String {
    match qt {
        QueryType::Full => format!("Where is {x} relative to {y}?"),
        QueryType::Vertical => format!("Where is {x} vertically relative to {y}?"),
        QueryType::Horizontal => format!("Where is {x} horizontally relative to {y}?"),
    }
}

/// Inverse of [`query_text`]: `(query type, asked-about entity, reference)`.
pub fn parse_query(text: &str) -> Result<(QueryType, Entity, Entity), LanguageError> {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| {
        Regex::new(r"^\s*(?i:where\s+is)\s+([A-Z])\s+(?:(?i:(vertically|horizontally))\s+)?(?i:relative\s+to)\s+([A-Z])\s*\??\s*$")
            .expect("valid regex")
    });
    let caps = re.captures(text).ok_or_else(|| LanguageError::QueryParse(text.to_string()))?;
    let qt = match caps.get(2).map(|m| m.as_str().to_ascii_lowercase()) {
        None => QueryType::Full,
        Some(axis) if axis == "vertically" => QueryType::Vertical,
        Some(_) => QueryType::Horizontal,
    };
    let x = caps[1].parse().map_err(|_| LanguageError::QueryParse(text.to_string()))?;
    let y = caps[3].parse().map_err(|_| LanguageError::QueryParse(text.to_string()))?;
    Ok((qt, x, y))
}
