use std::collections::BTreeSet;

use super::{AxisOrder, Edge, Entity, QueryType, Relation, SpatialError, SpatialGraph};

/// Per-axis order knowledge for every ordered entity pair, closed under
/// triangle composition.
///
/// All input constraints are basic point relations (`<`, `=`, `>`), so path
/// consistency is both sound and complete: a pair's order is determined here
/// exactly when every satisfying placement agrees on it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairKnowledge {
    entities: Vec<Entity>,
    rows: Vec<AxisOrder>,
    cols: Vec<AxisOrder>,
    consistent: bool,
}

impl PairKnowledge {
    /// Closes an arbitrary constraint list. Unlike [`SpatialGraph::new`], this
    /// accepts duplicate or contradictory edges and reports them through
    /// [`PairKnowledge::is_consistent`].
    pub fn from_constraints(entities: &[Entity], edges: &[Edge]) -> Self {
        let mut set: BTreeSet<Entity> = entities.iter().copied().collect();
        for e in edges {
            set.insert(e.subject);
            set.insert(e.object);
        }
        let entities: Vec<Entity> = set.into_iter().collect();
        let n = entities.len();
        let mut pk = PairKnowledge {
            rows: identity(n),
            cols: identity(n),
            entities,
            consistent: true,
        };
        for e in edges {
            let i = pk.index(e.subject).expect("edge endpoint registered");
            let j = pk.index(e.object).expect("edge endpoint registered");
            let (r, c) = e.direction.axes();
            if !(tighten(&mut pk.rows, n, i, j, r) && tighten(&mut pk.cols, n, i, j, c)) {
                pk.consistent = false;
                return pk;
            }
        }
        pk.consistent = close_axis(&mut pk.rows, n) && close_axis(&mut pk.cols, n);
        pk
    }

    pub fn entities(&self) -> &[Entity] {
        &self.entities
    }

    pub fn is_consistent(&self) -> bool {
        self.consistent
    }

    fn index(&self, e: Entity) -> Option<usize> {
        self.entities.binary_search(&e).ok()
    }

    fn pair_index(&self, x: Entity, y: Entity) -> Result<(usize, usize), SpatialError> {
        let i = self.index(x).ok_or(SpatialError::MissingEntity(x))?;
        let j = self.index(y).ok_or(SpatialError::MissingEntity(y))?;
        Ok((i, j))
    }

    /// `(row_order, col_order)` of `x` relative to `y`.
    pub fn orders(&self, x: Entity, y: Entity) -> Result<(AxisOrder, AxisOrder), SpatialError> {
        let (i, j) = self.pair_index(x, y)?;
        let n = self.entities.len();
        Ok((self.rows[i * n + j], self.cols[i * n + j]))
    }

    pub fn row_order(&self, x: Entity, y: Entity) -> Result<AxisOrder, SpatialError> {
        self.orders(x, y).map(|o| o.0)
    }

    pub fn col_order(&self, x: Entity, y: Entity) -> Result<AxisOrder, SpatialError> {
        self.orders(x, y).map(|o| o.1)
    }

    /// The uniquely entailed answer for `x` relative to `y`, if any.
    ///
    /// An inconsistent network entails nothing useful and yields `None`.
    pub fn infer(&self, x: Entity, y: Entity, qt: QueryType) -> Result<Option<Relation>, SpatialError> {
        if x == y {
            return Err(SpatialError::SamePair(x));
        }
        let (row, col) = self.orders(x, y)?;
        if !self.consistent {
            return Ok(None);
        }
        Ok(Relation::from_orders(qt, row, col))
    }

    /// True iff every pair is determined on both axes, which fixes the
    /// compacted layout up to translation.
    pub fn has_unique_layout(&self) -> bool {
        self.consistent && self.rows.iter().chain(&self.cols).all(|o| o.is_determined())
    }

    /// Whether `x`'s cell is fixed relative to `y` on both axes.
    fn pins(&self, x: Entity, y: Entity) -> bool {
        matches!(self.orders(x, y), Ok((r, c)) if r.is_determined() && c.is_determined())
    }
}

/// Free-function form of [`PairKnowledge::infer`].
pub fn infer_pair(pk: &PairKnowledge, x: Entity, y: Entity, qt: QueryType) -> Result<Option<Relation>, SpatialError> {
    pk.infer(x, y, qt)
}

/// Free-function form of [`PairKnowledge::has_unique_layout`].
pub fn has_unique_layout(pk: &PairKnowledge) -> bool {
    pk.has_unique_layout()
}

fn identity(n: usize) -> Vec<AxisOrder> {
    let mut m = vec![AxisOrder::Unknown; n * n];
    for i in 0..n {
        m[i * n + i] = AxisOrder::Eq;
    }
    m
}

/// Intersects `o` into `m[i][j]` (and its inverse into `m[j][i]`).
/// Returns false on contradiction.
fn tighten(m: &mut [AxisOrder], n: usize, i: usize, j: usize, o: AxisOrder) -> bool {
    match m[i * n + j].intersect(o) {
        Some(v) => {
            m[i * n + j] = v;
            m[j * n + i] = v.inverse();
            true
        }
        None => false,
    }
}

fn close_axis(m: &mut [AxisOrder], n: usize) -> bool {
    loop {
        let mut changed = false;
        for k in 0..n {
            for i in 0..n {
                let ik = m[i * n + k];
                if !ik.is_determined() {
                    continue;
                }
                for j in 0..n {
                    let implied = ik.compose(m[k * n + j]);
                    if !implied.is_determined() || m[i * n + j] == implied {
                        continue;
                    }
                    if !tighten(m, n, i, j, implied) {
                        return false;
                    }
                    changed = true;
                }
            }
        }
        if !changed {
            return true;
        }
    }
}

/// Replays `edge_order` and counts the stages after the first at which the
/// probed entity is not pinned on both axes relative to some entity already
/// introduced.
///
/// The probed entity is the one the edge introduces, or the edge's subject
/// when both endpoints are already known.
pub fn ambiguous_stage_count(graph: &SpatialGraph, edge_order: &[Edge]) -> Result<usize, SpatialError> {
    let mut expected: Vec<Edge> = graph.edges().to_vec();
    let mut given: Vec<Edge> = edge_order.to_vec();
    expected.sort();
    given.sort();
    if expected != given {
        return Err(SpatialError::EdgeOrder("edge order is not a permutation of the graph's edges".into()));
    }

    let mut introduced: BTreeSet<Entity> = BTreeSet::new();
    let mut count = 0;
    for (stage, edge) in edge_order.iter().enumerate() {
        let knows_subject = introduced.contains(&edge.subject);
        let knows_object = introduced.contains(&edge.object);
        introduced.insert(edge.subject);
        introduced.insert(edge.object);
        if stage == 0 {
            continue;
        }
        let probe = match (knows_subject, knows_object) {
            (false, false) => {
                return Err(SpatialError::EdgeOrder(format!(
                    "edge {edge} at position {stage} touches no introduced entity"
                )))
            }
            (false, true) => edge.subject,
            (true, false) => edge.object,
            (true, true) => edge.subject,
        };
        let prefix: Vec<Entity> = introduced.iter().copied().collect();
        let pk = PairKnowledge::from_constraints(&prefix, &edge_order[..=stage]);
        let ambiguous = !pk.is_consistent() || prefix.iter().any(|&w| w != probe && !pk.pins(probe, w));
        if ambiguous {
            count += 1;
        }
    }
    Ok(count)
}
