//! Exhaustive placement enumeration, kept independent of the closure.
//!
//! Only order and equality matter, so giving each of the `n` entities a
//! coordinate in `0..n` per axis reaches every realizable ordering. Edge
//! constraints never couple the two axes, so the set of satisfying
//! placements is the product of the satisfying row and column assignments;
//! each axis is enumerated on its own (`n^n` assignments instead of `n^2n`).

use super::{AxisOrder, Entity, QueryType, Relation, SpatialError, SpatialGraph};

pub const BRUTE_FORCE_MAX_ENTITIES: usize = 6;

const LT: u8 = 1;
const EQ: u8 = 2;
const GT: u8 = 4;

/// Every order each pair takes, per axis, across all satisfying placements.
#[derive(Debug, Clone)]
pub struct BruteForce {
    entities: Vec<Entity>,
    rows: Option<Vec<u8>>,
    cols: Option<Vec<u8>>,
}

impl BruteForce {
    pub fn new(graph: &SpatialGraph) -> Result<Self, SpatialError> {
        let entities = graph.entities().to_vec();
        let n = entities.len();
        if n > BRUTE_FORCE_MAX_ENTITIES {
            return Err(SpatialError::TooLarge {
                max: BRUTE_FORCE_MAX_ENTITIES,
                actual: n,
            });
        }
        let index = |e: Entity| entities.iter().position(|&x| x == e).expect("edge endpoint in graph");
        let mut row_constraints = Vec::new();
        let mut col_constraints = Vec::new();
        for edge in graph.edges() {
            let (r, c) = edge.direction.axes();
            let (i, j) = (index(edge.subject), index(edge.object));
            row_constraints.push((i, j, r));
            col_constraints.push((i, j, c));
        }
        Ok(BruteForce {
            rows: enumerate_axis(n, &row_constraints),
            cols: enumerate_axis(n, &col_constraints),
            entities,
        })
    }

    /// Whether any placement satisfies every edge.
    pub fn satisfiable(&self) -> bool {
        self.rows.is_some() && self.cols.is_some()
    }

    fn masks(&self, x: Entity, y: Entity) -> Result<Option<(u8, u8)>, SpatialError> {
        let n = self.entities.len();
        let i = self.entities.iter().position(|&e| e == x).ok_or(SpatialError::MissingEntity(x))?;
        let j = self.entities.iter().position(|&e| e == y).ok_or(SpatialError::MissingEntity(y))?;
        Ok(match (&self.rows, &self.cols) {
            (Some(r), Some(c)) => Some((r[i * n + j], c[i * n + j])),
            _ => None,
        })
    }

    /// The answer every satisfying placement agrees on, if there is one.
    pub fn infer(&self, x: Entity, y: Entity, qt: QueryType) -> Result<Option<Relation>, SpatialError> {
        if x == y {
            return Err(SpatialError::SamePair(x));
        }
        let Some((rows, cols)) = self.masks(x, y)? else {
            return Ok(None);
        };
        // Every placement in the row set combines with every one in the
        // column set, so the possible answers are the product of the masks.
        let mut answers = Vec::new();
        for r in bits(rows) {
            for c in bits(cols) {
                let answer = match qt {
                    QueryType::Vertical => Relation::from_orders(qt, r, AxisOrder::Unknown),
                    QueryType::Horizontal => Relation::from_orders(qt, AxisOrder::Unknown, c),
                    QueryType::Full => Relation::from_orders(qt, r, c),
                };
                answers.push(answer);
            }
        }
        answers.sort();
        answers.dedup();
        Ok(match answers.as_slice() {
            [Some(only)] => Some(*only),
            _ => None,
        })
    }

    /// Whether `x` is pinned relative to `y` on both axes in every placement.
    pub fn pins(&self, x: Entity, y: Entity) -> Result<bool, SpatialError> {
        Ok(matches!(self.masks(x, y)?, Some((r, c)) if r.count_ones() == 1 && c.count_ones() == 1))
    }
}

/// Oracle counterpart of the closure-based inference.
pub fn brute_force_infer(graph: &SpatialGraph, x: Entity, y: Entity, qt: QueryType) -> Result<Option<Relation>, SpatialError> {
    BruteForce::new(graph)?.infer(x, y, qt)
}

fn bits(mask: u8) -> impl Iterator<Item = AxisOrder> {
    [(LT, AxisOrder::Lt), (EQ, AxisOrder::Eq), (GT, AxisOrder::Gt)]
        .into_iter()
        .filter(move |(b, _)| mask & b != 0)
        .map(|(_, o)| o)
}

fn satisfies(coord: &[usize], (i, j, o): (usize, usize, AxisOrder)) -> bool {
    match o {
        AxisOrder::Lt => coord[i] < coord[j],
        AxisOrder::Eq => coord[i] == coord[j],
        AxisOrder::Gt => coord[i] > coord[j],
        AxisOrder::Unknown => true,
    }
}

/// Walks all `n^n` coordinate vectors; returns per-pair order masks, or
/// `None` when nothing satisfies the constraints.
fn enumerate_axis(n: usize, constraints: &[(usize, usize, AxisOrder)]) -> Option<Vec<u8>> {
    let mut masks = vec![0u8; n * n];
    let mut coord = vec![0usize; n];
    let mut found = false;
    loop {
        if constraints.iter().all(|&c| satisfies(&coord, c)) {
            found = true;
            for i in 0..n {
                for j in 0..n {
                    masks[i * n + j] |= match coord[i].cmp(&coord[j]) {
                        std::cmp::Ordering::Less => LT,
                        std::cmp::Ordering::Equal => EQ,
                        std::cmp::Ordering::Greater => GT,
                    };
                }
            }
        }
        // odometer increment
        let mut k = 0;
        while k < n {
            coord[k] += 1;
            if coord[k] < n {
                break;
            }
            coord[k] = 0;
            k += 1;
        }
        if k == n {
            break;
        }
    }
    found.then_some(masks)
}
