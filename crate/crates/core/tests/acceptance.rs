//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.
//!
//! Run with `cargo test -p spatial-sketch --test acceptance`.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spatial_sketch::ascii::{render, scan_coordinates, AsciiFormat};
use spatial_sketch::dataset::{read_jsonl, write_jsonl, DatasetRecord, PredictionRecord};
use spatial_sketch::generator::{build_connected_graph, generate_dataset, GenConfig, Instance};
use spatial_sketch::language::{parse_description, synthesize_description, Terminology};
use spatial_sketch::spatial::{BruteForce, Direction, Edge, Entity, QueryType, Relation, SpatialGraph};
use spatial_sketch::verifier::{evaluate_consistency, evaluate_desc_vs_ascii, score_predictions, TaskMode, VerifyMode};

const WORKED_DESCRIPTION: &str =
    "B is to the lower-right of A. D is to the right of B. C is at the bottom-right of A. C is located below B.";
const WORKED_GRID: &str = "+--+--+--+\n|A |  |  |\n+--+--+--+\n|  |B |D |\n+--+--+--+\n|  |C |  |\n+--+--+--+";

/// Share tolerance in percentage points.
const SHARE_TOLERANCE: f64 = 1.5;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(elapsed: Duration, limit_secs: u64) -> bool {
    elapsed <= Duration::from_secs(limit_secs)
}

fn fixture(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn default_run(target: usize, seed: u64) -> Vec<Instance> {
    let cfg = GenConfig {
        target_count: target,
        seed,
        ..GenConfig::default()
    };
    generate_dataset(&cfg).expect("default config generates").0
}

fn is_connected(n: usize, pairs: &[(usize, usize)]) -> bool {
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &(a, b) in pairs {
            for (x, y) in [(a, b), (b, a)] {
                if x == v && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
    }
    seen.into_iter().all(|s| s)
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut graphs = 0usize;
    let mut checks = 0usize;
    let mut disagreements = Vec::new();
    for n in 1..=4usize {
        let all_pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        for mask in 0u32..(1 << all_pairs.len()) {
            let pairs: Vec<(usize, usize)> = all_pairs
                .iter()
                .enumerate()
                .filter(|(k, _)| mask & (1 << k) != 0)
                .map(|(_, &p)| p)
                .collect();
            if pairs.len() > 5 || !is_connected(n, &pairs) {
                continue;
            }
            for code in 0..8usize.pow(pairs.len() as u32) {
                let mut c = code;
                let edges: Vec<Edge> = pairs
                    .iter()
                    .map(|&(i, j)| {
                        let dir = Direction::ALL[c % 8];
                        c /= 8;
                        Edge::new(Entity::nth(i), dir, Entity::nth(j))
                    })
                    .collect();
                let graph = SpatialGraph::new((0..n).map(Entity::nth), edges).expect("connected by construction");
                graphs += 1;
                let pk = graph.closure();
                let bf = BruteForce::new(&graph).expect("small graph");
                if pk.is_consistent() != bf.satisfiable() {
                    disagreements.push(format!("{:?}: consistency", graph.edges()));
                    continue;
                }
                if !pk.is_consistent() {
                    continue;
                }
                for &x in graph.entities() {
                    for &y in graph.entities() {
                        if x == y {
                            continue;
                        }
                        for qt in QueryType::ALL {
                            checks += 1;
                            if pk.infer(x, y, qt).ok() != bf.infer(x, y, qt).ok() {
                                disagreements.push(format!("{:?}: {x} vs {y} {qt}", graph.edges()));
                            }
                        }
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = disagreements.is_empty() && within(elapsed, 60);
    outcome(
        pass,
        format!(
            "{graphs} labeled graphs, {checks} pair queries, {} disagreements{}, {:.1}s (limit 60s)",
            disagreements.len(),
            disagreements.first().map(|d| format!(" (first: {d})")).unwrap_or_default(),
            elapsed.as_secs_f64()
        ),
    )
}

fn round_trip_integrity() -> Outcome {
    let start = Instant::now();
    let items = default_run(1000, 42);
    let mut desc_failures = 0;
    let mut scan_failures = 0;
    for inst in &items {
        let grid = &inst.ascii[&AsciiFormat::Grid];
        match evaluate_desc_vs_ascii(grid, &inst.description, VerifyMode::VerifyDesc) {
            Ok(r) if r.pass => {}
            _ => desc_failures += 1,
        }
        for f in AsciiFormat::ALL {
            let ok = scan_coordinates(&render(&inst.placement, f)).is_ok_and(|s| s.placement() == inst.placement);
            if !ok {
                scan_failures += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        desc_failures == 0 && scan_failures == 0 && within(elapsed, 10),
        format!(
            "{} instances, {desc_failures} verify_desc failures, {scan_failures} scan/render failures, {:.2}s (limit 10s)",
            items.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn unique_answer_guarantee() -> Outcome {
    let items: Vec<Instance> = default_run(1200, 42)
        .into_iter()
        .filter(|i| i.num_components <= 6)
        .take(500)
        .collect();
    let confirmed = items
        .iter()
        .filter(|inst| {
            let bf = BruteForce::new(&inst.graph).expect("at most six entities");
            bf.infer(inst.subject, inst.reference, inst.query_type).ok() == Some(Some(inst.label))
        })
        .count();
    outcome(
        items.len() == 500 && confirmed == 500,
        format!("{confirmed}/{} labels confirmed by exhaustive placement", items.len()),
    )
}

fn parser_inverse() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut failures = 0;
    let mut cases = 0;
    for _ in 0..1000 {
        let n = rng.random_range(2..=8);
        let max_edges = (n * (n - 1) / 2).min(12);
        let r = rng.random_range(n - 1..=max_edges.max(n - 1));
        let scene = build_connected_graph(&mut rng, n, r).expect("valid parameters");
        let mut want = scene.edge_order.clone();
        want.sort();
        for t in Terminology::ALL {
            cases += 1;
            let text = synthesize_description(&scene.edge_order, t, &mut rng);
            let parsed = parse_description(&text);
            let mut got = parsed.claims.clone();
            got.sort();
            if got != want || !parsed.bad_segments.is_empty() {
                failures += 1;
            }
        }
    }
    outcome(
        failures == 0 && cases == 7000,
        format!("{cases} descriptions (1000 graphs x 7 terminologies), {failures} failures"),
    )
}

fn distribution_balance() -> Outcome {
    let start = Instant::now();
    let items = default_run(20_000, GenConfig::default().seed);
    let elapsed = start.elapsed();
    let n = items.len() as f64;
    let mut bad = Vec::new();
    let mut qt_counts: BTreeMap<QueryType, usize> = BTreeMap::new();
    let mut term_counts: BTreeMap<Terminology, usize> = BTreeMap::new();
    for inst in &items {
        *qt_counts.entry(inst.query_type).or_default() += 1;
        *term_counts.entry(inst.terminology).or_default() += 1;
    }
    let mut worst_qt: f64 = 0.0;
    for qt in QueryType::ALL {
        let share = 100.0 * *qt_counts.get(&qt).unwrap_or(&0) as f64 / n;
        worst_qt = worst_qt.max((share - 100.0 / 3.0).abs());
        if (share - 100.0 / 3.0).abs() > SHARE_TOLERANCE {
            bad.push(format!("{qt} {share:.2}%"));
        }
    }
    let mut worst_term: f64 = 0.0;
    for t in Terminology::ALL {
        let share = 100.0 * *term_counts.get(&t).unwrap_or(&0) as f64 / n;
        worst_term = worst_term.max((share - 100.0 / 7.0).abs());
        if (share - 100.0 / 7.0).abs() > SHARE_TOLERANCE {
            bad.push(format!("{t} {share:.2}%"));
        }
    }
    let comp = (
        items.iter().map(|i| i.num_components).min().unwrap_or(0),
        items.iter().map(|i| i.num_components).max().unwrap_or(0),
    );
    let rel = (
        items.iter().map(|i| i.num_relations).min().unwrap_or(0),
        items.iter().map(|i| i.num_relations).max().unwrap_or(0),
    );
    if comp != (2, 8) {
        bad.push(format!("components span {comp:?}"));
    }
    if rel != (1, 12) {
        bad.push(format!("relations span {rel:?}"));
    }
    outcome(
        bad.is_empty() && items.len() == 20_000 && within(elapsed, 300),
        format!(
            "20000 instances; worst query-type gap {worst_qt:.2} pts, worst terminology gap {worst_term:.2} pts; components {}..{}, relations {}..{}; {:.1}s (limit 300s){}",
            comp.0,
            comp.1,
            rel.0,
            rel.1,
            elapsed.as_secs_f64(),
            if bad.is_empty() { String::new() } else { format!("; off: {}", bad.join(", ")) }
        ),
    )
}

fn worked_example() -> Outcome {
    let align = evaluate_desc_vs_ascii(WORKED_GRID, WORKED_DESCRIPTION, VerifyMode::VerifyAscii);
    let cons = evaluate_consistency(WORKED_GRID, "Where is C horizontally relative to D?", "left");
    let (align_ok, acc) = match &align {
        Ok(r) => (r.pass && r.acc == 1.0 && r.correct.len() == 4, r.acc),
        Err(_) => (false, f64::NAN),
    };
    let (cons_ok, actual) = match &cons {
        Ok(r) => (r.pass && r.actual == "left", r.actual.clone()),
        Err(e) => (false, e.to_string()),
    };
    outcome(
        align_ok && cons_ok,
        format!("verify_ascii acc {acc}, consistency actual {actual:?}"),
    )
}

fn metric_fidelity() -> Outcome {
    let gold: Vec<DatasetRecord> =
        read_jsonl(std::io::BufReader::new(std::fs::File::open(fixture("scoring_gold.jsonl")).unwrap())).unwrap();
    let preds: Vec<PredictionRecord> =
        read_jsonl(std::io::BufReader::new(std::fs::File::open(fixture("scoring_pred.jsonl")).unwrap())).unwrap();
    let report = score_predictions(&gold, &preds, TaskMode::AnswerAndAscii).unwrap();
    let fixture_ok = report.count == 10
        && report.ans_accuracy == Some(0.7)
        && report.cons == Some(0.5)
        && report.c_acc == Some(0.8);

    // Diagonal confusion: every prediction is the gold label.
    let diag_gold: Vec<DatasetRecord> = default_run(60, 8).iter().map(Instance::to_record).collect();
    let diag_preds: Vec<PredictionRecord> = diag_gold
        .iter()
        .map(|g| PredictionRecord {
            id: g.id.clone(),
            answer: Some(g.label.as_str().to_string()),
            ..PredictionRecord::default()
        })
        .collect();
    let diag = score_predictions(&diag_gold, &diag_preds, TaskMode::AnswerOnly).unwrap();
    let diagonal = diag
        .confusion_matrix
        .iter()
        .all(|(g, row)| row.keys().all(|p| p == g));
    let acc = diag.ans_accuracy.unwrap_or(f64::NAN);
    let f1_ok = diagonal && diag.macro_f1.values().all(|&f| f == acc);
    outcome(
        fixture_ok && f1_ok,
        format!(
            "fixture ans {:?} cons {:?} c_acc {:?}; diagonal matrix accuracy {acc}, macro F1 {:?}",
            report.ans_accuracy, report.cons, report.c_acc, diag.macro_f1
        ),
    )
}

fn determinism() -> Outcome {
    let run = || {
        let records: Vec<DatasetRecord> = default_run(300, 42).iter().map(Instance::to_record).collect();
        let mut buf = Vec::new();
        write_jsonl(&mut buf, &records).unwrap();
        buf
    };
    let (a, b) = (run(), run());
    let gen_ok = a == b;

    let gold: Vec<DatasetRecord> = read_jsonl(&a[..]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let preds: Vec<PredictionRecord> = gold
        .iter()
        .map(|g| PredictionRecord {
            id: g.id.clone(),
            answer: Some(Relation::ALL[rng.random_range(0..Relation::ALL.len())].as_str().to_string()),
            ascii: g.ascii.get(&AsciiFormat::Grid).cloned().filter(|_| rng.random_bool(0.7)),
            description: None,
        })
        .collect();
    let base = score_predictions(&gold, &preds, TaskMode::AnswerAndAscii).unwrap();
    let mut perm_ok = true;
    for seed in 0..5 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = gold.clone();
        let mut p = preds.clone();
        g.shuffle(&mut rng);
        p.shuffle(&mut rng);
        let report = score_predictions(&g, &p, TaskMode::AnswerAndAscii).unwrap();
        perm_ok &= serde_json::to_string(&report).unwrap() == serde_json::to_string(&base).unwrap();
    }
    outcome(
        gen_ok && perm_ok,
        format!(
            "repeat generation byte-identical: {gen_ok} ({} bytes); score report identical under 5 shuffles: {perm_ok}",
            a.len()
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("oracle equivalence", oracle_equivalence),
        ("round-trip integrity", round_trip_integrity),
        ("unique-answer guarantee", unique_answer_guarantee),
        ("parser inverse", parser_inverse),
        ("distribution balance", distribution_balance),
        ("worked-example fidelity", worked_example),
        ("metric fidelity", metric_fidelity),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = check();
        if !result.pass {
            failed += 1;
        }
        println!(
            "[{}] criterion {} {name}: {}",
            if result.pass { "PASS" } else { "FAIL" },
            i + 1,
            result.detail
        );
    }
    println!("acceptance: {}/{} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
