use rand::seq::IndexedRandom;
use rand::Rng;

use super::GenError;
use crate::language::query_text;
use crate::spatial::{Entity, PairKnowledge, QueryType, Relation, SpatialGraph};

/// How to pick among answerable queries.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryPolicy {
    /// Sampling weights in [`QueryType::ALL`] order.
    pub weights: [f64; 3],
    /// Prefer candidates with this label when any exist.
    pub label: Option<Relation>,
}

impl Default for QueryPolicy {
    fn default() -> Self {
        QueryPolicy {
            weights: [1.0 / 3.0; 3],
            label: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledQuery {
    pub text: String,
    pub query_type: QueryType,
    pub subject: Entity,
    pub reference: Entity,
    pub label: Relation,
    pub is_directly_stated: bool,
}

/// Every uniquely answerable (subject, reference, label) for a query type.
pub fn answerable(pk: &PairKnowledge, qt: QueryType) -> Vec<(Entity, Entity, Relation)> {
    let ents = pk.entities();
    let mut out = Vec::new();
    for &x in ents {
        for &y in ents {
            if x == y {
                continue;
            }
            if let Ok(Some(label)) = pk.infer(x, y, qt) {
                out.push((x, y, label));
            }
        }
    }
    out
}

pub fn sample_query<R: Rng + ?Sized>(
    rng: &mut R,
    graph: &SpatialGraph,
    pk: &PairKnowledge,
    policy: &QueryPolicy,
) -> Result<SampledQuery, GenError> {
    if !pk.is_consistent() {
        return Err(GenError::Inconsistent);
    }
    let pools: Vec<_> = QueryType::ALL.iter().map(|&qt| answerable(pk, qt)).collect();
    let open: Vec<usize> = (0..3).filter(|&i| !pools[i].is_empty()).collect();
    if open.is_empty() {
        return Err(GenError::NoAnswerablePair);
    }
    let weighted: Vec<usize> = open.iter().copied().filter(|&i| policy.weights[i] > 0.0).collect();
    let qi = if weighted.is_empty() {
        *open.choose(rng).expect("non-empty")
    } else {
        *weighted
            .choose_weighted(rng, |&i| policy.weights[i])
            .expect("positive weights")
    };
    let qt = QueryType::ALL[qi];
    let pool = &pools[qi];
    let preferred: Vec<_> = match policy.label {
        Some(l) => pool.iter().filter(|c| c.2 == l).copied().collect(),
        None => Vec::new(),
    };
    let &(x, y, label) = if preferred.is_empty() {
        pool.choose(rng)
    } else {
        preferred.choose(rng)
    }
    .expect("non-empty pool");

    let is_directly_stated = graph.edge_between(x, y).is_some_and(|e| {
        let (row, col) = e.direction.axes();
        Relation::from_orders(qt, row, col) == Some(label)
    });
    Ok(SampledQuery {
        text: query_text(qt, x, y),
        query_type: qt,
        subject: x,
        reference: y,
        label,
        is_directly_stated,
    })
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::spatial::{Direction, Edge};

    fn graph(edges: &[&str]) -> SpatialGraph {
        SpatialGraph::from_edges(edges.iter().map(|s| s.parse::<Edge>().unwrap()).collect()).unwrap()
    }

    #[test]
    fn worked_example_query_is_reachable() {
        let g = graph(&["B lower-right A", "D right B", "C lower-right A", "C below B"]);
        let pk = g.closure();
        let policy = QueryPolicy {
            weights: [0.0, 0.0, 1.0],
            label: Some(Relation::Dir(Direction::Left)),
        };
        let c = Entity::new('C').unwrap();
        let d = Entity::new('D').unwrap();
        let mut hit = false;
        for seed in 0..200 {
            let q = sample_query(&mut ChaCha8Rng::seed_from_u64(seed), &g, &pk, &policy).unwrap();
            assert_eq!(q.query_type, QueryType::Horizontal);
            if (q.subject, q.reference) == (c, d) {
                assert_eq!(q.text, "Where is C horizontally relative to D?");
                assert_eq!(q.label, Relation::Dir(Direction::Left));
                assert!(!q.is_directly_stated);
                hit = true;
            }
        }
        assert!(hit);
    }

    #[test]
    fn single_edge_full_query() {
        let g = graph(&["A above B"]);
        let policy = QueryPolicy {
            weights: [1.0, 0.0, 0.0],
            label: None,
        };
        for seed in 0..20 {
            let q = sample_query(&mut ChaCha8Rng::seed_from_u64(seed), &g, &g.closure(), &policy).unwrap();
            assert_eq!(q.query_type, QueryType::Full);
            assert!(q.is_directly_stated);
            let expected = if q.subject.as_char() == 'A' { "above" } else { "below" };
            assert_eq!(q.label.as_str(), expected);
        }
    }

    #[test]
    fn undetermined_pair_is_never_sampled() {
        let g = graph(&["A above B", "C upper-right B"]);
        let (a, c) = (Entity::new('A').unwrap(), Entity::new('C').unwrap());
        let policy = QueryPolicy {
            weights: [0.0, 1.0, 0.0],
            label: None,
        };
        for seed in 0..200 {
            let q = sample_query(&mut ChaCha8Rng::seed_from_u64(seed), &g, &g.closure(), &policy).unwrap();
            assert!(![(a, c), (c, a)].contains(&(q.subject, q.reference)));
        }
    }

    #[test]
    fn absent_label_preference_is_ignored() {
        let g = graph(&["A upper-left B"]);
        let policy = QueryPolicy {
            weights: [0.0, 0.0, 1.0],
            label: Some(Relation::SameColumn),
        };
        let q = sample_query(&mut ChaCha8Rng::seed_from_u64(0), &g, &g.closure(), &policy).unwrap();
        assert_eq!(q.query_type, QueryType::Horizontal);
        assert!(matches!(q.label, Relation::Dir(Direction::Left | Direction::Right)));
    }

    #[test]
    fn lone_entity_has_no_query() {
        let g = SpatialGraph::new([Entity::nth(0)], Vec::new()).unwrap();
        let err = sample_query(&mut ChaCha8Rng::seed_from_u64(0), &g, &g.closure(), &QueryPolicy::default());
        assert_eq!(err, Err(GenError::NoAnswerablePair));
    }
}
