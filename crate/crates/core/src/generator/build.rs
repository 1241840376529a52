use std::collections::{BTreeMap, BTreeSet};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use super::GenError;
use crate::spatial::{relation_between, AxisOrder, Direction, Edge, Entity, PairKnowledge, Placement, QueryType, Relation, SpatialGraph};

/// Resampled (target, direction) draws allowed per entity before giving up.
pub const PLACEMENT_ATTEMPTS: usize = 64;
/// Largest step multiple tried along a direction before resampling.
pub const MAX_STEP: i64 = 3;

/// A generated scene: the graph, a placement realizing it, and the order in
/// which edges were added.
#[derive(Debug, Clone, PartialEq)]
pub struct BuiltScene {
    pub graph: SpatialGraph,
    pub placement: Placement,
    pub edge_order: Vec<Edge>,
}

/// Grows a connected scene from one seed entity, then adds extra edges read
/// off the placement until `n_relations` is reached.
pub fn build_connected_graph<R: Rng + ?Sized>(
    rng: &mut R,
    n_components: usize,
    n_relations: usize,
) -> Result<BuiltScene, GenError> {
    if !(1..=26).contains(&n_components) {
        return Err(GenError::Parameters(format!("{n_components} components")));
    }
    let max_edges = n_components * (n_components - 1) / 2;
    if n_relations + 1 < n_components || n_relations > max_edges {
        return Err(GenError::Parameters(format!(
            "{n_relations} relations for {n_components} components"
        )));
    }

    let entities: Vec<Entity> = (0..n_components).map(Entity::nth).collect();
    let mut unplaced = entities.clone();
    let seed = unplaced.swap_remove(rng.random_range(0..unplaced.len()));
    let mut coords: BTreeMap<Entity, (i64, i64)> = BTreeMap::from([(seed, (0, 0))]);
    let mut occupied: BTreeSet<(i64, i64)> = BTreeSet::from([(0, 0)]);
    let mut placed = vec![seed];
    let mut edges = Vec::with_capacity(n_relations);

    while !unplaced.is_empty() {
        let u = unplaced.swap_remove(rng.random_range(0..unplaced.len()));
        let mut attempts = 0;
        loop {
            if attempts == PLACEMENT_ATTEMPTS {
                return Err(GenError::RetryExhausted(attempts));
            }
            attempts += 1;
            let v = *placed.choose(rng).expect("at least one placed entity");
            let dir = *Direction::ALL.choose(rng).expect("eight directions");
            let (dr, dc) = dir.unit_step();
            let (vr, vc) = coords[&v];
            let cell = (1..=MAX_STEP)
                .map(|k| (vr + k * dr, vc + k * dc))
                .find(|c| !occupied.contains(c));
            if let Some(cell) = cell {
                coords.insert(u, cell);
                occupied.insert(cell);
                placed.push(u);
                edges.push(Edge::new(u, dir, v));
                break;
            }
        }
    }

    let placement = Placement::from_signed(&coords);
    let connected: BTreeSet<(Entity, Entity)> = edges.iter().map(|e| e.pair()).collect();
    let mut spare: Vec<(Entity, Entity)> = entities
        .iter()
        .enumerate()
        .flat_map(|(i, &a)| entities[i + 1..].iter().map(move |&b| (a, b)))
        .filter(|p| !connected.contains(p))
        .collect();
    spare.shuffle(rng);
    for (a, b) in spare {
        if edges.len() == n_relations {
            break;
        }
        let (s, o) = if rng.random_bool(0.5) { (a, b) } else { (b, a) };
        if let Ok(Relation::Dir(dir)) = relation_between(&placement, s, o, QueryType::Full) {
            edges.push(Edge::new(s, dir, o));
        }
    }

    let graph = SpatialGraph::new(entities, edges.clone()).expect("construction keeps the graph valid");
    Ok(BuiltScene {
        graph,
        placement,
        edge_order: edges,
    })
}

/// Finds a compacted placement satisfying arbitrary edge constraints.
///
/// Each axis is layered along the closure's strict order, with a random
/// slack of zero or one level per equality class; pairs left sharing a cell
/// without being forced to are then pulled apart on an unconstrained axis.
pub fn realize_placement<R: Rng + ?Sized>(
    entities: &[Entity],
    edges: &[Edge],
    rng: &mut R,
) -> Result<Placement, GenError> {
    let pk = PairKnowledge::from_constraints(entities, edges);
    if !pk.is_consistent() {
        return Err(GenError::Inconsistent);
    }
    let ents = pk.entities().to_vec();
    let order = |axis: usize, a: Entity, b: Entity| {
        let (r, c) = pk.orders(a, b).expect("known entities");
        if axis == 0 {
            r
        } else {
            c
        }
    };

    // class id per entity and level per class, per axis
    let mut class_of = [vec![0usize; ents.len()], vec![0usize; ents.len()]];
    let mut levels: [Vec<i64>; 2] = [Vec::new(), Vec::new()];
    for axis in 0..2 {
        let mut reps: Vec<Entity> = Vec::new();
        for (i, &e) in ents.iter().enumerate() {
            match reps.iter().position(|&r| order(axis, e, r) == AxisOrder::Eq) {
                Some(c) => class_of[axis][i] = c,
                None => {
                    class_of[axis][i] = reps.len();
                    reps.push(e);
                }
            }
        }
        // Strict order is transitively closed, so predecessor counts give a
        // topological order.
        let preds = |c: usize| reps.iter().filter(|&&r| order(axis, r, reps[c]) == AxisOrder::Lt).count();
        let mut topo: Vec<usize> = (0..reps.len()).collect();
        topo.sort_by_key(|&c| preds(c));
        let mut level = vec![0i64; reps.len()];
        for &c in &topo {
            let base = topo
                .iter()
                .filter(|&&p| order(axis, reps[p], reps[c]) == AxisOrder::Lt)
                .map(|&p| level[p] + 1)
                .max()
                .unwrap_or(0);
            level[c] = base + i64::from(rng.random_bool(0.5));
        }
        levels[axis] = level;
    }

    loop {
        let cell = |i: usize| (levels[0][class_of[0][i]], levels[1][class_of[1][i]]);
        let clash = (0..ents.len())
            .flat_map(|i| (i + 1..ents.len()).map(move |j| (i, j)))
            .find(|&(i, j)| cell(i) == cell(j) && pk.orders(ents[i], ents[j]).ok() != Some((AxisOrder::Eq, AxisOrder::Eq)));
        let Some((i, _)) = clash else { break };
        let axis = if order(0, ents[i], ents[clash.unwrap().1]) == AxisOrder::Unknown { 0 } else { 1 };
        let class = class_of[axis][i];
        let from = levels[axis][class];
        for l in levels[axis].iter_mut() {
            if *l > from {
                *l += 1;
            }
        }
        levels[axis][class] = from + 1;
    }

    let coords = ents
        .iter()
        .enumerate()
        .map(|(i, &e)| (e, (levels[0][class_of[0][i]], levels[1][class_of[1][i]])))
        .collect();
    Ok(Placement::from_signed(&coords))
}
