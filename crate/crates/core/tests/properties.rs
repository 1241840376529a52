use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use spatial_sketch::ascii::{render, scan_coordinates, AsciiFormat};
use spatial_sketch::generator::{build_connected_graph, realize_placement};
use spatial_sketch::language::{aliases, normalize_answer, parse_description, synthesize_description, Terminology};
use spatial_sketch::spatial::{
    relation_between, AxisOrder, BruteForce, Direction, Edge, Entity, PairKnowledge, Placement, QueryType, Relation,
    SpatialGraph,
};
use spatial_sketch::verifier::evaluate_consistency;

/// A connected graph on up to `max_n` entities with arbitrary (possibly
/// contradictory) directions.
fn any_graph(max_n: usize) -> impl Strategy<Value = SpatialGraph> {
    (2..=max_n)
        .prop_flat_map(|n| {
            let parents = proptest::collection::vec(any::<prop::sample::Index>(), n - 1);
            let extra = proptest::collection::vec((0..n, 0..n), 0..4);
            let dirs = proptest::collection::vec(0..8usize, n - 1 + 4);
            (Just(n), parents, extra, dirs)
        })
        .prop_map(|(n, parents, extra, dirs)| {
            let mut seen = BTreeSet::new();
            let mut edges = Vec::new();
            let mut d = dirs.into_iter();
            let mut push = |a: usize, b: usize, dir: usize, edges: &mut Vec<Edge>| {
                let key = (a.min(b), a.max(b));
                if a != b && seen.insert(key) {
                    edges.push(Edge::new(Entity::nth(a), Direction::ALL[dir], Entity::nth(b)));
                }
            };
            for (i, p) in parents.iter().enumerate() {
                push(i + 1, p.index(i + 1), d.next().unwrap(), &mut edges);
            }
            for (a, b) in extra {
                push(a, b, d.next().unwrap(), &mut edges);
            }
            SpatialGraph::new((0..n).map(Entity::nth), edges).unwrap()
        })
}

fn scene(max_n: usize) -> impl Strategy<Value = (u64, usize, usize)> {
    (any::<u64>(), 2..=max_n).prop_flat_map(|(seed, n)| {
        let hi = (n * (n - 1) / 2).min(12);
        (Just(seed), Just(n), (n - 1)..=hi)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn closure_matches_exhaustive_placement(g in any_graph(5)) {
        let pk = g.closure();
        let bf = BruteForce::new(&g).unwrap();
        prop_assert_eq!(pk.is_consistent(), bf.satisfiable());
        if pk.is_consistent() {
            for &x in g.entities() {
                for &y in g.entities() {
                    if x == y { continue; }
                    for qt in QueryType::ALL {
                        prop_assert_eq!(pk.infer(x, y, qt).unwrap(), bf.infer(x, y, qt).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn knowledge_is_antisymmetric(g in any_graph(6)) {
        let pk = g.closure();
        prop_assume!(pk.is_consistent());
        for &x in g.entities() {
            for &y in g.entities() {
                let (r, c) = pk.orders(x, y).unwrap();
                prop_assert_eq!(pk.orders(y, x).unwrap(), (r.inverse(), c.inverse()));
            }
        }
    }

    #[test]
    fn closure_is_idempotent_and_monotone(g in any_graph(6), extra in (0..6usize, 0..6usize, 0..8usize)) {
        let pk = g.closure();
        prop_assume!(pk.is_consistent());
        let ents = g.entities().to_vec();
        // Feeding every determined full relation back in changes nothing.
        let mut derived: Vec<Edge> = g.edges().to_vec();
        for &x in &ents {
            for &y in &ents {
                if let (false, Ok(Some(Relation::Dir(d)))) = (x == y, pk.infer(x, y, QueryType::Full)) {
                    derived.push(Edge::new(x, d, y));
                }
            }
        }
        let again = PairKnowledge::from_constraints(&ents, &derived);
        for &x in &ents {
            for &y in &ents {
                prop_assert_eq!(again.orders(x, y).unwrap(), pk.orders(x, y).unwrap());
            }
        }
        // One more constraint never un-determines an answer.
        let (a, b, d) = extra;
        let (a, b) = (a % ents.len(), b % ents.len());
        prop_assume!(a != b);
        let mut more = g.edges().to_vec();
        more.push(Edge::new(ents[a], Direction::ALL[d], ents[b]));
        let bigger = PairKnowledge::from_constraints(&ents, &more);
        if bigger.is_consistent() {
            for &x in &ents {
                for &y in &ents {
                    if x == y { continue; }
                    for qt in QueryType::ALL {
                        if let Some(ans) = pk.infer(x, y, qt).unwrap() {
                            prop_assert_eq!(bigger.infer(x, y, qt).unwrap(), Some(ans));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn scan_inverts_render(cells in proptest::collection::btree_map(0..26usize, (0..5i64, 0..5i64), 1..9)) {
        let coords: BTreeMap<Entity, (i64, i64)> = cells.into_iter().map(|(k, v)| (Entity::nth(k), v)).collect();
        let placement = Placement::from_signed(&coords);
        let mut stacks: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for cell in placement.coords().values() {
            *stacks.entry(*cell).or_default() += 1;
        }
        let tallest = stacks.values().copied().max().unwrap_or(0);
        for f in AsciiFormat::ALL {
            // A simple-format field holds at most three stacked labels.
            if f == AsciiFormat::Simple && tallest > spatial_sketch::ascii::SIMPLE_FIELD_WIDTH {
                continue;
            }
            let text = render(&placement, f);
            prop_assert_eq!(scan_coordinates(&text).unwrap().placement(), placement.clone(), "{}", text);
        }
    }

    #[test]
    fn parse_inverts_synthesize((seed, n, r) in scene(8), t in 0..7usize) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let built = build_connected_graph(&mut rng, n, r).unwrap();
        let text = synthesize_description(&built.edge_order, Terminology::ALL[t], &mut rng);
        let parsed = parse_description(&text);
        prop_assert_eq!(parsed.claims, built.edge_order);
        prop_assert!(parsed.bad_segments.is_empty());
    }

    #[test]
    fn builder_edges_match_placement((seed, n, r) in scene(8)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let built = build_connected_graph(&mut rng, n, r).unwrap();
        prop_assert!(built.placement.is_compact());
        for e in built.graph.edges() {
            prop_assert_eq!(
                relation_between(&built.placement, e.subject, e.object, QueryType::Full).unwrap(),
                Relation::Dir(e.direction)
            );
        }
    }

    #[test]
    fn realized_layout_satisfies_constraints(g in any_graph(6), seed in any::<u64>()) {
        let pk = g.closure();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let result = realize_placement(g.entities(), g.edges(), &mut rng);
        prop_assert_eq!(result.is_ok(), pk.is_consistent());
        if let Ok(p) = result {
            prop_assert!(p.is_compact());
            for e in g.edges() {
                prop_assert_eq!(
                    relation_between(&p, e.subject, e.object, QueryType::Full).unwrap(),
                    Relation::Dir(e.direction)
                );
            }
            for &x in g.entities() {
                for &y in g.entities() {
                    if x < y && p.get(x) == p.get(y) {
                        prop_assert_eq!(pk.orders(x, y).unwrap(), (AxisOrder::Eq, AxisOrder::Eq));
                    }
                }
            }
        }
    }

    #[test]
    fn consistency_agrees_with_direct_reading(
        cells in proptest::collection::btree_map(0..6usize, (0..4i64, 0..4i64), 2..6),
        pick in (any::<prop::sample::Index>(), any::<prop::sample::Index>(), 0..3usize),
        answer in prop::sample::select(vec!["left", "to the right", "north", "6 o'clock", "same row",
            "same column", "bottom-right", "10:30", "nowhere", "upper left"]),
    ) {
        let coords: BTreeMap<Entity, (i64, i64)> = cells.into_iter().map(|(k, v)| (Entity::nth(k), v)).collect();
        let placement = Placement::from_signed(&coords);
        let ents: Vec<Entity> = coords.keys().copied().collect();
        let (x, y) = (*pick.0.get(&ents), *pick.1.get(&ents));
        prop_assume!(x != y);
        let qt = QueryType::ALL[pick.2];
        let grid = render(&placement, AsciiFormat::Grid);
        let query = spatial_sketch::language::query_text(qt, x, y);
        let reference = normalize_answer(answer).map_or(answer.to_string(), |r| r.as_str().to_string());
        let verdict = evaluate_consistency(&grid, &query, &reference).unwrap().pass;
        let direct = relation_between(&placement, x, y, qt).ok().is_some_and(|r| Some(r) == normalize_answer(answer));
        prop_assert_eq!(verdict, direct);
    }
}

#[test]
fn every_alias_normalizes_to_its_label() {
    for label in Relation::ALL {
        assert_eq!(normalize_answer(label.as_str()), Some(label));
        for alias in aliases(label) {
            assert_eq!(normalize_answer(alias), Some(label), "{alias}");
        }
    }
}

#[test]
fn directions_biject_onto_axis_pairs() {
    let mut seen = Vec::new();
    for d in Direction::ALL {
        let (r, c) = d.axes();
        assert_ne!((r, c), (AxisOrder::Eq, AxisOrder::Eq));
        assert!(r != AxisOrder::Unknown && c != AxisOrder::Unknown);
        assert_eq!(Direction::from_axes(r, c), Some(d));
        assert_eq!(d.inverse().inverse(), d);
        assert_eq!(d.inverse().axes(), (r.inverse(), c.inverse()));
        assert!(!seen.contains(&(r, c)));
        seen.push((r, c));
    }
    assert_eq!(seen.len(), 8);
}
