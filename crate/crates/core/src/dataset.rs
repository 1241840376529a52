//! JSONL records, statistics and splits for generated datasets.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ascii::{scan_coordinates, AsciiFormat};
use crate::generator::Instance;
use crate::language::{parse_query, Terminology};
use crate::spatial::{ambiguous_stage_count, Edge, QueryType, Relation, SpatialGraph};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("record {id}: {msg}")]
    Record { id: String, msg: String },
    #[error("{0}")]
    Split(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One dataset line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetRecord {
    pub id: String,
    pub description: String,
    pub question: String,
    pub query_type: QueryType,
    pub label: Relation,
    pub terminology_used: String,
    pub ascii: BTreeMap<AsciiFormat, String>,
    /// `[subject, direction, object]` triples in description order.
    pub edges: Vec<[String; 3]>,
    pub num_components: usize,
    pub num_relations: usize,
    pub is_directly_stated: bool,
    pub has_unique_layout: bool,
    pub ambiguous_stages: usize,
}

/// One model output line. Every payload field is optional.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answer: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ascii: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

impl PredictionRecord {
    pub fn has_payload(&self) -> bool {
        self.answer.is_some() || self.ascii.is_some() || self.description.is_some()
    }
}

impl DatasetRecord {
    /// Grid text used to recover the placement: grid, then panel, then simple.
    pub fn layout_text(&self) -> Option<&str> {
        [AsciiFormat::Grid, AsciiFormat::Panel, AsciiFormat::Simple]
            .iter()
            .find_map(|f| self.ascii.get(f))
            .map(String::as_str)
    }

    pub fn parsed_edges(&self) -> Result<Vec<Edge>, DatasetError> {
        self.edges
            .iter()
            .map(|[s, d, o]| format!("{s} {d} {o}").parse::<Edge>())
            .collect::<Result<_, _>>()
            .map_err(|e| self.fault(e.to_string()))
    }

    fn fault(&self, msg: impl Into<String>) -> DatasetError {
        DatasetError::Record {
            id: self.id.clone(),
            msg: msg.into(),
        }
    }
}

impl Instance {
    pub fn to_record(&self) -> DatasetRecord {
        DatasetRecord {
            id: self.id.clone(),
            description: self.description.clone(),
            question: self.query.clone(),
            query_type: self.query_type,
            label: self.label,
            terminology_used: self.terminology.as_str().to_string(),
            ascii: self.ascii.clone(),
            edges: self
                .graph
                .edges()
                .iter()
                .map(|e| [e.subject.to_string(), e.direction.to_string(), e.object.to_string()])
                .collect(),
            num_components: self.num_components,
            num_relations: self.num_relations,
            is_directly_stated: self.is_directly_stated,
            has_unique_layout: self.has_unique_layout,
            ambiguous_stages: self.ambiguous_stages,
        }
    }

    /// Rebuilds an instance, recovering the placement from the ASCII layout
    /// and checking the record against its own graph.
    pub fn from_record(record: &DatasetRecord) -> Result<Instance, DatasetError> {
        let edges = record.parsed_edges()?;
        let graph = SpatialGraph::from_edges(edges.clone()).map_err(|e| record.fault(e.to_string()))?;
        let (qt, subject, reference) = parse_query(&record.question).map_err(|e| record.fault(e.to_string()))?;
        if qt != record.query_type {
            return Err(record.fault(format!("question asks {qt}, query_type says {}", record.query_type)));
        }
        let terminology: Terminology = record
            .terminology_used
            .parse()
            .map_err(|e: crate::language::LanguageError| record.fault(e.to_string()))?;
        let text = record.layout_text().ok_or_else(|| record.fault("no ascii layout"))?;
        let placement = scan_coordinates(text)
            .map_err(|e| record.fault(e.to_string()))?
            .placement();
        if placement.len() != graph.entities().len() {
            return Err(record.fault("ascii layout and edges disagree on entities"));
        }
        let ambiguous = ambiguous_stage_count(&graph, &edges).map_err(|e| record.fault(e.to_string()))?;
        if ambiguous != record.ambiguous_stages {
            return Err(record.fault("ambiguous_stages does not match the edges"));
        }
        Ok(Instance {
            id: record.id.clone(),
            graph,
            placement,
            description: record.description.clone(),
            query: record.question.clone(),
            query_type: qt,
            subject,
            reference,
            label: record.label,
            terminology,
            ascii: record.ascii.clone(),
            num_components: record.num_components,
            num_relations: record.num_relations,
            is_directly_stated: record.is_directly_stated,
            has_unique_layout: record.has_unique_layout,
            ambiguous_stages: record.ambiguous_stages,
        })
    }
}

/// Reads one JSON value per non-blank line.
pub fn read_jsonl<T: DeserializeOwned, R: BufRead>(reader: R) -> Result<Vec<T>, DatasetError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|source| DatasetError::Json { line: i + 1, source })?);
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize, W: Write>(mut writer: W, items: &[T]) -> Result<(), DatasetError> {
    for item in items {
        write_jsonl_line(&mut writer, item)?;
    }
    Ok(())
}

pub fn write_jsonl_line<T: Serialize, W: Write>(mut writer: W, item: &T) -> Result<(), DatasetError> {
    serde_json::to_writer(&mut writer, item).map_err(std::io::Error::from)?;
    writer.write_all(b"\n")?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub min: usize,
    pub max: usize,
    pub mean: f64,
}

/// Published means of the original dataset, carried for comparison only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceMeans {
    pub num_components_mean: f64,
    pub num_relations_mean: f64,
    pub directly_stated_pct: f64,
    pub unique_layout_pct: f64,
    pub ambiguous_stages_mean: f64,
}

impl Default for ReferenceMeans {
    fn default() -> Self {
        ReferenceMeans {
            num_components_mean: 5.67,
            num_relations_mean: 6.44,
            directly_stated_pct: 52.4,
            unique_layout_pct: 41.9,
            ambiguous_stages_mean: 4.13,
        }
    }
}

/// Summary statistics sidecar, recomputable from the dataset alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetStats {
    pub count: usize,
    pub num_components: Option<Spread>,
    pub num_relations: Option<Spread>,
    pub directly_stated_pct: f64,
    pub unique_layout_pct: f64,
    pub ambiguous_stages_mean: f64,
    pub query_type_pct: BTreeMap<String, f64>,
    pub terminology_pct: BTreeMap<String, f64>,
    pub label_pct: BTreeMap<String, f64>,
    pub reference: ReferenceMeans,
}

fn spread(values: impl Iterator<Item = usize> + Clone) -> Option<Spread> {
    let n = values.clone().count();
    Some(Spread {
        min: values.clone().min()?,
        max: values.clone().max()?,
        mean: values.sum::<usize>() as f64 / n as f64,
    })
}

fn pct(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        100.0 * part as f64 / whole as f64
    }
}

fn shares<'a>(keys: impl Iterator<Item = &'a str>, universe: &[&str], whole: usize) -> BTreeMap<String, f64> {
    let mut counts: BTreeMap<String, usize> = universe.iter().map(|k| (k.to_string(), 0)).collect();
    for k in keys {
        *counts.entry(k.to_string()).or_default() += 1;
    }
    counts.into_iter().map(|(k, c)| (k, pct(c, whole))).collect()
}

impl DatasetStats {
    pub fn compute(records: &[DatasetRecord]) -> Self {
        let n = records.len();
        let qts: Vec<&str> = QueryType::ALL.iter().map(|q| q.as_str()).collect();
        let terms: Vec<&str> = Terminology::ALL.iter().map(|t| t.as_str()).collect();
        let labels: Vec<&str> = Relation::ALL.iter().map(|l| l.as_str()).collect();
        DatasetStats {
            count: n,
            num_components: spread(records.iter().map(|r| r.num_components)),
            num_relations: spread(records.iter().map(|r| r.num_relations)),
            directly_stated_pct: pct(records.iter().filter(|r| r.is_directly_stated).count(), n),
            unique_layout_pct: pct(records.iter().filter(|r| r.has_unique_layout).count(), n),
            ambiguous_stages_mean: if n == 0 {
                0.0
            } else {
                records.iter().map(|r| r.ambiguous_stages).sum::<usize>() as f64 / n as f64
            },
            query_type_pct: shares(records.iter().map(|r| r.query_type.as_str()), &qts, n),
            terminology_pct: shares(records.iter().map(|r| r.terminology_used.as_str()), &terms, n),
            label_pct: shares(records.iter().map(|r| r.label.as_str()), &labels, n),
            reference: ReferenceMeans::default(),
        }
    }
}

/// Names of the three splits written by [`split_indices`].
pub const SPLIT_NAMES: [&str; 3] = ["train", "validation", "test"];

/// Shuffles `0..n` with `seed` and cuts it into consecutive parts of the
/// given sizes. Indices inside each part stay in ascending order.
pub fn split_indices(n: usize, sizes: &[usize], seed: u64) -> Result<Vec<Vec<usize>>, DatasetError> {
    let wanted: usize = sizes.iter().sum();
    if wanted > n {
        return Err(DatasetError::Split(format!("split sizes add up to {wanted}, only {n} records")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut parts = Vec::with_capacity(sizes.len());
    let mut start = 0;
    for &size in sizes {
        let mut part = order[start..start + size].to_vec();
        part.sort_unstable();
        parts.push(part);
        start += size;
    }
    Ok(parts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{generate_dataset, GenConfig};

    fn sample(n: usize) -> Vec<Instance> {
        let cfg = GenConfig {
            target_count: n,
            seed: 5,
            ..GenConfig::default()
        };
        generate_dataset(&cfg).unwrap().0
    }

    #[test]
    fn records_round_trip_byte_identically() {
        let items = sample(60);
        let records: Vec<DatasetRecord> = items.iter().map(Instance::to_record).collect();
        let mut buf = Vec::new();
        write_jsonl(&mut buf, &records).unwrap();
        let back: Vec<DatasetRecord> = read_jsonl(&buf[..]).unwrap();
        let rebuilt: Vec<Instance> = back.iter().map(|r| Instance::from_record(r).unwrap()).collect();
        assert_eq!(rebuilt, items);
        let mut again = Vec::new();
        write_jsonl(&mut again, &rebuilt.iter().map(Instance::to_record).collect::<Vec<_>>()).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn record_field_order() {
        let rec = sample(1)[0].to_record();
        let line = serde_json::to_string(&rec).unwrap();
        let keys = [
            "\"id\"",
            "\"description\"",
            "\"question\"",
            "\"query_type\"",
            "\"label\"",
            "\"terminology_used\"",
            "\"ascii\"",
            "\"edges\"",
            "\"num_components\"",
            "\"num_relations\"",
            "\"is_directly_stated\"",
            "\"has_unique_layout\"",
            "\"ambiguous_stages\"",
        ];
        let pos: Vec<usize> = keys.iter().map(|k| line.find(k).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]), "{line}");
        assert!(line.contains("\\n"));
    }

    #[test]
    fn malformed_line_reports_number() {
        let text = "{\"id\":\"1\",\"answer\":\"left\"}\n\n{oops\n";
        let err = read_jsonl::<PredictionRecord, _>(text.as_bytes()).unwrap_err();
        assert!(matches!(err, DatasetError::Json { line: 3, .. }), "{err}");
    }

    #[test]
    fn stats_are_stable_through_json() {
        let records: Vec<DatasetRecord> = sample(30).iter().map(Instance::to_record).collect();
        let stats = DatasetStats::compute(&records);
        assert_eq!(stats.count, 30);
        let qt_sum: f64 = stats.query_type_pct.values().sum();
        assert!((qt_sum - 100.0).abs() < 1e-9);
        let back: DatasetStats = serde_json::from_str(&serde_json::to_string(&stats).unwrap()).unwrap();
        assert_eq!(back, stats);
        assert_eq!(DatasetStats::compute(&[]).num_components, None);
    }

    #[test]
    fn splits_are_disjoint_and_deterministic() {
        let parts = split_indices(20, &[10, 4, 6], 9).unwrap();
        assert_eq!(parts, split_indices(20, &[10, 4, 6], 9).unwrap());
        let mut all: Vec<usize> = parts.concat();
        all.sort_unstable();
        assert_eq!(all, (0..20).collect::<Vec<_>>());
        assert!(split_indices(5, &[3, 3], 0).is_err());
    }
}
