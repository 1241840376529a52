//! Qualitative spatial algebra over eight grid directions.
//!
//! Coordinates are `(row, col)` with row 0 at the top and col 0 at the left.
//! "X above Y" means X's row is strictly smaller and the columns are equal;
//! diagonals require strict inequality on both axes with no magnitude
//! constraint.

mod closure;
mod oracle;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub use closure::{ambiguous_stage_count, has_unique_layout, infer_pair, PairKnowledge};
pub use oracle::{brute_force_infer, BruteForce, BRUTE_FORCE_MAX_ENTITIES};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpatialError {
    #[error("invalid entity label {0:?}: expected a single uppercase letter")]
    InvalidEntity(String),
    #[error("unknown direction {0:?}")]
    UnknownDirection(String),
    #[error("unknown query type {0:?}")]
    UnknownQueryType(String),
    #[error("unknown relation label {0:?}")]
    UnknownRelation(String),
    #[error("self-loop on {0}")]
    SelfLoop(Entity),
    #[error("duplicate edge between {0} and {1}")]
    DuplicateEdge(Entity, Entity),
    #[error("graph is not connected")]
    Disconnected,
    #[error("graph has no entities")]
    Empty,
    #[error("entity {0} is not part of the graph")]
    MissingEntity(Entity),
    #[error("query needs two distinct entities, got {0} twice")]
    SamePair(Entity),
    #[error("{0} and {1} occupy the same cell")]
    CoLocated(Entity, Entity),
    #[error("brute force supports at most {max} entities, graph has {actual}")]
    TooLarge { max: usize, actual: usize },
    #[error("edge order fault: {0}")]
    EdgeOrder(String),
}

/// A single uppercase entity label, `A` through `Z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Entity(char);

impl Entity {
    pub fn new(c: char) -> Result<Self, SpatialError> {
        if c.is_ascii_uppercase() {
            Ok(Entity(c))
        } else {
            Err(SpatialError::InvalidEntity(c.to_string()))
        }
    }

    /// The `i`-th letter of the alphabet. Panics past `Z`.
    pub fn nth(i: usize) -> Self {
        assert!(i < 26, "entity index {i} out of range");
        Entity((b'A' + i as u8) as char)
    }

    pub fn as_char(self) -> char {
        self.0
    }
}

impl fmt::Display for Entity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for Entity {
    type Err = SpatialError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut chars = s.trim().chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => Entity::new(c),
            _ => Err(SpatialError::InvalidEntity(s.to_string())),
        }
    }
}

impl Serialize for Entity {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Entity {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Order of the first entity relative to the second along one axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AxisOrder {
    Lt,
    Eq,
    Gt,
    Unknown,
}

impl AxisOrder {
    pub fn inverse(self) -> Self {
        match self {
            AxisOrder::Lt => AxisOrder::Gt,
            AxisOrder::Gt => AxisOrder::Lt,
            other => other,
        }
    }

    /// Point-algebra composition: given `x ? z` (self) and `z ? y` (other),
    /// the entailed `x ? y`.
    pub fn compose(self, other: Self) -> Self {
        use AxisOrder::*;
        match (self, other) {
            (Unknown, _) | (_, Unknown) => Unknown,
            (Eq, o) => o,
            (s, Eq) => s,
            (Lt, Lt) => Lt,
            (Gt, Gt) => Gt,
            (Lt, Gt) | (Gt, Lt) => Unknown,
        }
    }

    /// Conjunction of two pieces of knowledge; `None` on contradiction.
    pub fn intersect(self, other: Self) -> Option<Self> {
        match (self, other) {
            (AxisOrder::Unknown, o) | (o, AxisOrder::Unknown) => Some(o),
            (a, b) if a == b => Some(a),
            _ => None,
        }
    }

    pub fn is_determined(self) -> bool {
        self != AxisOrder::Unknown
    }

    pub fn of(a: usize, b: usize) -> Self {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => AxisOrder::Lt,
            std::cmp::Ordering::Equal => AxisOrder::Eq,
            std::cmp::Ordering::Greater => AxisOrder::Gt,
        }
    }
}

/// Convenience free function mirroring [`AxisOrder::compose`].
pub fn compose_axis(a: AxisOrder, b: AxisOrder) -> AxisOrder {
    a.compose(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    Above,
    Below,
    Left,
    Right,
    UpperLeft,
    UpperRight,
    LowerLeft,
    LowerRight,
}

impl Direction {
    pub const ALL: [Direction; 8] = [
        Direction::Above,
        Direction::Below,
        Direction::Left,
        Direction::Right,
        Direction::UpperLeft,
        Direction::UpperRight,
        Direction::LowerLeft,
        Direction::LowerRight,
    ];

    pub fn inverse(self) -> Self {
        use Direction::*;
        match self {
            Above => Below,
            Below => Above,
            Left => Right,
            Right => Left,
            UpperLeft => LowerRight,
            LowerRight => UpperLeft,
            UpperRight => LowerLeft,
            LowerLeft => UpperRight,
        }
    }

    /// `(row_order, col_order)` of the subject relative to the object.
    pub fn axes(self) -> (AxisOrder, AxisOrder) {
        use AxisOrder::*;
        match self {
            Direction::Above => (Lt, Eq),
            Direction::Below => (Gt, Eq),
            Direction::Left => (Eq, Lt),
            Direction::Right => (Eq, Gt),
            Direction::UpperLeft => (Lt, Lt),
            Direction::UpperRight => (Lt, Gt),
            Direction::LowerLeft => (Gt, Lt),
            Direction::LowerRight => (Gt, Gt),
        }
    }

    /// Inverse of [`Direction::axes`]; `None` for `(Eq, Eq)` or any unknown axis.
    pub fn from_axes(row: AxisOrder, col: AxisOrder) -> Option<Self> {
        Direction::ALL.into_iter().find(|d| d.axes() == (row, col))
    }

    pub fn is_diagonal(self) -> bool {
        let (r, c) = self.axes();
        r != AxisOrder::Eq && c != AxisOrder::Eq
    }

    /// Unit step `(drow, dcol)` in grid coordinates.
    pub fn unit_step(self) -> (i64, i64) {
        let sign = |o: AxisOrder| match o {
            AxisOrder::Lt => -1,
            AxisOrder::Gt => 1,
            _ => 0,
        };
        let (r, c) = self.axes();
        (sign(r), sign(c))
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Above => "above",
            Direction::Below => "below",
            Direction::Left => "left",
            Direction::Right => "right",
            Direction::UpperLeft => "upper-left",
            Direction::UpperRight => "upper-right",
            Direction::LowerLeft => "lower-left",
            Direction::LowerRight => "lower-right",
        }
    }
}

/// Free-function form of [`Direction::axes`].
pub fn direction_to_axes(dir: Direction) -> (AxisOrder, AxisOrder) {
    dir.axes()
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Direction {
    type Err = SpatialError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace([' ', '_'], "-");
        Direction::ALL
            .into_iter()
            .find(|d| d.as_str() == key)
            .ok_or_else(|| SpatialError::UnknownDirection(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum QueryType {
    Full,
    Vertical,
    Horizontal,
}

impl QueryType {
    pub const ALL: [QueryType; 3] = [QueryType::Full, QueryType::Vertical, QueryType::Horizontal];

    pub fn as_str(self) -> &'static str {
        match self {
            QueryType::Full => "full",
            QueryType::Vertical => "vertical",
            QueryType::Horizontal => "horizontal",
        }
    }

    /// The answer labels a query of this type can have.
    pub fn labels(self) -> &'static [Relation] {
        use Relation::*;
        match self {
            QueryType::Full => &[
                Dir(Direction::Above),
                Dir(Direction::Below),
                Dir(Direction::Left),
                Dir(Direction::Right),
                Dir(Direction::UpperLeft),
                Dir(Direction::UpperRight),
                Dir(Direction::LowerLeft),
                Dir(Direction::LowerRight),
            ],
            QueryType::Vertical => &[Dir(Direction::Above), Dir(Direction::Below), SameLevel],
            QueryType::Horizontal => &[Dir(Direction::Left), Dir(Direction::Right), SameColumn],
        }
    }
}

impl fmt::Display for QueryType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for QueryType {
    type Err = SpatialError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase();
        QueryType::ALL
            .into_iter()
            .find(|q| q.as_str() == key)
            .ok_or_else(|| SpatialError::UnknownQueryType(s.to_string()))
    }
}

/// An answer label: one of the eight directions, or an axis-only alignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Relation {
    Dir(Direction),
    SameLevel,
    SameColumn,
}

impl Relation {
    pub const ALL: [Relation; 10] = [
        Relation::Dir(Direction::Above),
        Relation::Dir(Direction::Below),
        Relation::Dir(Direction::Left),
        Relation::Dir(Direction::Right),
        Relation::Dir(Direction::UpperLeft),
        Relation::Dir(Direction::UpperRight),
        Relation::Dir(Direction::LowerLeft),
        Relation::Dir(Direction::LowerRight),
        Relation::SameLevel,
        Relation::SameColumn,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Relation::Dir(d) => d.as_str(),
            Relation::SameLevel => "same level",
            Relation::SameColumn => "same column",
        }
    }

    /// Answer for a query of type `qt` given the per-axis orders, if determined.
    pub fn from_orders(qt: QueryType, row: AxisOrder, col: AxisOrder) -> Option<Self> {
        match qt {
            QueryType::Vertical => match row {
                AxisOrder::Lt => Some(Relation::Dir(Direction::Above)),
                AxisOrder::Gt => Some(Relation::Dir(Direction::Below)),
                AxisOrder::Eq => Some(Relation::SameLevel),
                AxisOrder::Unknown => None,
            },
            QueryType::Horizontal => match col {
                AxisOrder::Lt => Some(Relation::Dir(Direction::Left)),
                AxisOrder::Gt => Some(Relation::Dir(Direction::Right)),
                AxisOrder::Eq => Some(Relation::SameColumn),
                AxisOrder::Unknown => None,
            },
            QueryType::Full => Direction::from_axes(row, col).map(Relation::Dir),
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Relation {
    type Err = SpatialError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase();
        Relation::ALL
            .into_iter()
            .find(|r| r.as_str() == key)
            .ok_or_else(|| SpatialError::UnknownRelation(s.to_string()))
    }
}

macro_rules! serde_via_str {
    ($($t:ty),*) => {$(
        impl Serialize for $t {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $t {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    )*};
}

serde_via_str!(Direction, QueryType, Relation, Edge);

/// A directed relation: `subject` lies in `direction` of `object`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub subject: Entity,
    pub object: Entity,
    pub direction: Direction,
}

impl Edge {
    pub fn new(subject: Entity, direction: Direction, object: Entity) -> Self {
        Edge {
            subject,
            object,
            direction,
        }
    }

    /// The same constraint seen from the object.
    pub fn reversed(self) -> Self {
        Edge::new(self.object, self.direction.inverse(), self.subject)
    }

    /// Orientation-free key used for duplicate detection.
    pub fn pair(self) -> (Entity, Entity) {
        if self.subject <= self.object {
            (self.subject, self.object)
        } else {
            (self.object, self.subject)
        }
    }

    pub fn touches(self, e: Entity) -> bool {
        self.subject == e || self.object == e
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.subject, self.direction, self.object)
    }
}

impl FromStr for Edge {
    type Err = SpatialError;

    /// Parses `"B lower-right A"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split_whitespace().collect();
        match parts.as_slice() {
            [subj, dir, obj] => Ok(Edge::new(subj.parse()?, dir.parse()?, obj.parse()?)),
            _ => Err(SpatialError::UnknownDirection(s.to_string())),
        }
    }
}

/// Entities plus direction-labelled edges.
///
/// Structure is validated on construction: no self-loops, at most one edge
/// per unordered pair, and connectivity. Geometric consistency is not
/// required here; see [`PairKnowledge`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpatialGraph {
    entities: Vec<Entity>,
    edges: Vec<Edge>,
}

impl SpatialGraph {
    pub fn new(entities: impl IntoIterator<Item = Entity>, edges: Vec<Edge>) -> Result<Self, SpatialError> {
        let mut set: BTreeSet<Entity> = entities.into_iter().collect();
        for e in &edges {
            set.insert(e.subject);
            set.insert(e.object);
        }
        if set.is_empty() {
            return Err(SpatialError::Empty);
        }
        let mut seen = BTreeSet::new();
        for e in &edges {
            if e.subject == e.object {
                return Err(SpatialError::SelfLoop(e.subject));
            }
            if !seen.insert(e.pair()) {
                let (a, b) = e.pair();
                return Err(SpatialError::DuplicateEdge(a, b));
            }
        }
        let graph = SpatialGraph {
            entities: set.into_iter().collect(),
            edges,
        };
        if !graph.is_connected() {
            return Err(SpatialError::Disconnected);
        }
        Ok(graph)
    }

    pub fn from_edges(edges: Vec<Edge>) -> Result<Self, SpatialError> {
        SpatialGraph::new([], edges)
    }

    /// Entities in label order.
    pub fn entities(&self) -> &[Entity] {
        &self.entities
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn contains(&self, e: Entity) -> bool {
        self.entities.binary_search(&e).is_ok()
    }

    /// The edge between `a` and `b`, oriented so that `a` is its subject.
    pub fn edge_between(&self, a: Entity, b: Entity) -> Option<Edge> {
        self.edges.iter().find_map(|e| {
            if e.subject == a && e.object == b {
                Some(*e)
            } else if e.subject == b && e.object == a {
                Some(e.reversed())
            } else {
                None
            }
        })
    }

    fn is_connected(&self) -> bool {
        let mut adj: BTreeMap<Entity, Vec<Entity>> = BTreeMap::new();
        for e in &self.edges {
            adj.entry(e.subject).or_default().push(e.object);
            adj.entry(e.object).or_default().push(e.subject);
        }
        let mut seen = BTreeSet::from([self.entities[0]]);
        let mut queue = VecDeque::from([self.entities[0]]);
        while let Some(v) = queue.pop_front() {
            for &w in adj.get(&v).map(Vec::as_slice).unwrap_or_default() {
                if seen.insert(w) {
                    queue.push_back(w);
                }
            }
        }
        seen.len() == self.entities.len()
    }

    pub fn closure(&self) -> PairKnowledge {
        PairKnowledge::from_constraints(&self.entities, &self.edges)
    }
}

/// Concrete integer cell per entity.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Placement {
    coords: BTreeMap<Entity, (usize, usize)>,
}

impl Placement {
    pub fn new(coords: BTreeMap<Entity, (usize, usize)>) -> Self {
        Placement { coords }
    }

    /// Compacts signed coordinates so that every row and column index in
    /// `0..=max` is used by some entity.
    pub fn from_signed(coords: &BTreeMap<Entity, (i64, i64)>) -> Self {
        let rank = |values: BTreeSet<i64>| -> BTreeMap<i64, usize> {
            values.into_iter().enumerate().map(|(i, v)| (v, i)).collect()
        };
        let rows = rank(coords.values().map(|c| c.0).collect());
        let cols = rank(coords.values().map(|c| c.1).collect());
        Placement {
            coords: coords
                .iter()
                .map(|(&e, &(r, c))| (e, (rows[&r], cols[&c])))
                .collect(),
        }
    }

    pub fn compacted(&self) -> Self {
        let signed = self
            .coords
            .iter()
            .map(|(&e, &(r, c))| (e, (r as i64, c as i64)))
            .collect();
        Placement::from_signed(&signed)
    }

    pub fn is_compact(&self) -> bool {
        *self == self.compacted()
    }

    pub fn get(&self, e: Entity) -> Option<(usize, usize)> {
        self.coords.get(&e).copied()
    }

    pub fn coords(&self) -> &BTreeMap<Entity, (usize, usize)> {
        &self.coords
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// `(rows, cols)` spanned, i.e. `max + 1` on each axis.
    pub fn dimensions(&self) -> (usize, usize) {
        let rows = self.coords.values().map(|c| c.0 + 1).max().unwrap_or(0);
        let cols = self.coords.values().map(|c| c.1 + 1).max().unwrap_or(0);
        (rows, cols)
    }

    pub fn relation_between(&self, x: Entity, y: Entity, qt: QueryType) -> Result<Relation, SpatialError> {
        relation_between(self, x, y, qt)
    }
}

/// Reads the relation of `x` to `y` off concrete coordinates.
pub fn relation_between(p: &Placement, x: Entity, y: Entity, qt: QueryType) -> Result<Relation, SpatialError> {
    let (rx, cx) = p.get(x).ok_or(SpatialError::MissingEntity(x))?;
    let (ry, cy) = p.get(y).ok_or(SpatialError::MissingEntity(y))?;
    Relation::from_orders(qt, AxisOrder::of(rx, ry), AxisOrder::of(cx, cy)).ok_or(SpatialError::CoLocated(x, y))
}
