use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{evaluate_consistency, evaluate_desc_vs_ascii, VerifyMode};
use crate::dataset::{DatasetRecord, PredictionRecord};
use crate::language::normalize_answer;
use crate::spatial::{QueryType, Relation};

/// Confusion-matrix column for answers that match no label.
pub const OTHER: &str = "other";
/// Key of the macro F1 computed over all query types together.
pub const POOLED: &str = "pooled";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScoreError {
    #[error("prediction id {0:?} has no gold record")]
    UnknownId(String),
    #[error("duplicate prediction id {0:?}")]
    DuplicatePrediction(String),
    #[error("duplicate gold id {0:?}")]
    DuplicateGold(String),
    #[error("prediction {0:?} carries no answer, ascii or description")]
    EmptyPrediction(String),
    #[error("unknown task mode {0:?}")]
    UnknownMode(String),
}

/// Which model outputs are being scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskMode {
    /// Answers only.
    AnswerOnly,
    /// Layouts drawn from the gold description.
    AsciiOnly,
    /// Answer plus the layout the model reasoned over.
    AnswerAndAscii,
    /// Descriptions written from the gold layout.
    DescOnly,
}

impl TaskMode {
    pub const ALL: [TaskMode; 4] = [TaskMode::AnswerOnly, TaskMode::AsciiOnly, TaskMode::AnswerAndAscii, TaskMode::DescOnly];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskMode::AnswerOnly => "answer_only",
            TaskMode::AsciiOnly => "ascii_only",
            TaskMode::AnswerAndAscii => "answer_and_ascii",
            TaskMode::DescOnly => "desc_only",
        }
    }

    fn scores_answers(self) -> bool {
        matches!(self, TaskMode::AnswerOnly | TaskMode::AnswerAndAscii)
    }
}

impl fmt::Display for TaskMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaskMode {
    type Err = ScoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TaskMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s.trim())
            .ok_or_else(|| ScoreError::UnknownMode(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceVerdict {
    pub id: String,
    pub query_type: QueryType,
    pub gold: Relation,
    /// Normalized predicted label, `"other"` when unmatched.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicted: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correct: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alignment: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub consistent: Option<bool>,
    /// Verifier faults hit while judging this instance.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub faults: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub mode: TaskMode,
    pub count: usize,
    pub ans_accuracy: Option<f64>,
    pub ascii_alignment_mean: Option<f64>,
    pub cons: Option<f64>,
    /// Answer accuracy over the consistent instances; absent when none are.
    pub c_acc: Option<f64>,
    /// Per query type present in gold, plus `"pooled"`.
    pub macro_f1: BTreeMap<String, f64>,
    /// Gold label → predicted label (or `"other"`) → count.
    pub confusion_matrix: BTreeMap<String, BTreeMap<String, usize>>,
    pub instances: Vec<InstanceVerdict>,
}

/// Scores predictions against gold. Gold records without a prediction count
/// as wrong, misaligned and inconsistent; verifier faults likewise count
/// against the instance instead of aborting.
pub fn score_predictions(
    gold: &[DatasetRecord],
    preds: &[PredictionRecord],
    mode: TaskMode,
) -> Result<MetricsReport, ScoreError> {
    let mut gold_by_id: BTreeMap<&str, &DatasetRecord> = BTreeMap::new();
    for g in gold {
        if gold_by_id.insert(&g.id, g).is_some() {
            return Err(ScoreError::DuplicateGold(g.id.clone()));
        }
    }
    let mut pred_by_id: BTreeMap<&str, &PredictionRecord> = BTreeMap::new();
    for p in preds {
        if !gold_by_id.contains_key(p.id.as_str()) {
            return Err(ScoreError::UnknownId(p.id.clone()));
        }
        if !p.has_payload() {
            return Err(ScoreError::EmptyPrediction(p.id.clone()));
        }
        if pred_by_id.insert(&p.id, p).is_some() {
            return Err(ScoreError::DuplicatePrediction(p.id.clone()));
        }
    }

    let instances: Vec<InstanceVerdict> = gold_by_id
        .values()
        .map(|g| judge(g, pred_by_id.get(g.id.as_str()).copied(), mode))
        .collect();

    let n = instances.len();
    let rate = |k: usize, of: usize| if of == 0 { 0.0 } else { k as f64 / of as f64 };
    let answers = mode.scores_answers();
    let ans_accuracy = answers.then(|| rate(instances.iter().filter(|v| v.correct == Some(true)).count(), n));
    let ascii_alignment_mean = (mode != TaskMode::AnswerOnly).then(|| {
        let sum: f64 = instances.iter().map(|v| v.alignment.unwrap_or(0.0)).sum();
        if n == 0 {
            0.0
        } else {
            sum / n as f64
        }
    });
    let (cons, c_acc) = if mode == TaskMode::AnswerAndAscii {
        let consistent: Vec<&InstanceVerdict> = instances.iter().filter(|v| v.consistent == Some(true)).collect();
        let right = consistent.iter().filter(|v| v.correct == Some(true)).count();
        (
            Some(rate(consistent.len(), n)),
            (!consistent.is_empty()).then(|| rate(right, consistent.len())),
        )
    } else {
        (None, None)
    };

    let mut macro_f1 = BTreeMap::new();
    let mut confusion_matrix: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
    if answers && n > 0 {
        let pairs = |qt: Option<QueryType>| -> Vec<(Relation, Option<Relation>)> {
            instances
                .iter()
                .filter(|v| qt.is_none_or(|q| v.query_type == q))
                .map(|v| (v.gold, v.predicted.as_deref().and_then(|p| p.parse().ok())))
                .collect()
        };
        for qt in QueryType::ALL {
            let items = pairs(Some(qt));
            if !items.is_empty() {
                macro_f1.insert(qt.as_str().to_string(), macro_f1_over(&items, qt.labels()));
            }
        }
        macro_f1.insert(POOLED.to_string(), macro_f1_over(&pairs(None), &Relation::ALL));
        for v in &instances {
            let col = v.predicted.clone().unwrap_or_else(|| OTHER.to_string());
            *confusion_matrix
                .entry(v.gold.as_str().to_string())
                .or_default()
                .entry(col)
                .or_default() += 1;
        }
    }

    Ok(MetricsReport {
        mode,
        count: n,
        ans_accuracy,
        ascii_alignment_mean,
        cons,
        c_acc,
        macro_f1,
        confusion_matrix,
        instances,
    })
}

fn judge(gold: &DatasetRecord, pred: Option<&PredictionRecord>, mode: TaskMode) -> InstanceVerdict {
    let mut v = InstanceVerdict {
        id: gold.id.clone(),
        query_type: gold.query_type,
        gold: gold.label,
        predicted: None,
        correct: None,
        alignment: None,
        consistent: None,
        faults: Vec::new(),
    };
    let answer = pred.and_then(|p| p.answer.as_deref());
    let ascii = pred.and_then(|p| p.ascii.as_deref());
    let normalized = answer.and_then(normalize_answer);

    if mode.scores_answers() {
        v.predicted = Some(normalized.map_or(OTHER, |r| r.as_str()).to_string());
        v.correct = Some(normalized == Some(gold.label));
    }

    match mode {
        TaskMode::AsciiOnly | TaskMode::AnswerAndAscii => {
            v.alignment = Some(match ascii {
                Some(grid) => match evaluate_desc_vs_ascii(grid, &gold.description, VerifyMode::VerifyAscii) {
                    Ok(r) => r.acc,
                    Err(e) => {
                        v.faults.push(e.to_string());
                        0.0
                    }
                },
                None => 0.0,
            });
        }
        TaskMode::DescOnly => {
            let desc = pred.and_then(|p| p.description.as_deref());
            v.alignment = Some(match (gold.layout_text(), desc) {
                (Some(grid), Some(desc)) => match evaluate_desc_vs_ascii(grid, desc, VerifyMode::VerifyDesc) {
                    Ok(r) => r.acc,
                    Err(e) => {
                        v.faults.push(e.to_string());
                        0.0
                    }
                },
                _ => 0.0,
            });
        }
        TaskMode::AnswerOnly => {}
    }

    if mode == TaskMode::AnswerAndAscii {
        v.consistent = Some(match (ascii, answer) {
            (Some(grid), Some(answer)) => {
                let reference = normalized.map_or(answer, |r| r.as_str());
                match evaluate_consistency(grid, &gold.question, reference) {
                    Ok(r) => r.pass,
                    Err(e) => {
                        v.faults.push(e.to_string());
                        false
                    }
                }
            }
            _ => false,
        });
    }
    v
}

/// Unweighted mean F1 over the labels in `labels` that occur as a gold or
/// predicted value. Predictions outside `labels` only cost recall.
fn macro_f1_over(items: &[(Relation, Option<Relation>)], labels: &[Relation]) -> f64 {
    let seen: BTreeSet<Relation> = items
        .iter()
        .flat_map(|&(g, p)| std::iter::once(g).chain(p))
        .filter(|l| labels.contains(l))
        .collect();
    if seen.is_empty() {
        return 0.0;
    }
    let f1s: Vec<f64> = seen
        .iter()
        .map(|&l| {
            let tp = items.iter().filter(|&&(g, p)| g == l && p == Some(l)).count() as f64;
            let fp = items.iter().filter(|&&(g, p)| g != l && p == Some(l)).count() as f64;
            let fn_ = items.iter().filter(|&&(g, p)| g == l && p != Some(l)).count() as f64;
            if tp == 0.0 {
                0.0
            } else {
                2.0 * tp / (2.0 * tp + fp + fn_)
            }
        })
        .collect();
    f1s.iter().sum::<f64>() / f1s.len() as f64
}

/// Plain-text summary: one header row, one value row.
pub fn render_summary(report: &MetricsReport) -> String {
    let cell = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |v| format!("{:.4}", v));
    let f1 = |k: &str| cell(report.macro_f1.get(k).copied());
    let headers = ["Ans", "ASCII", "Cons", "C_Acc", "F1 full", "F1 vert", "F1 horiz", "F1 pooled"];
    let values = [
        cell(report.ans_accuracy),
        cell(report.ascii_alignment_mean),
        cell(report.cons),
        cell(report.c_acc),
        f1("full"),
        f1("vertical"),
        f1("horizontal"),
        f1(POOLED),
    ];
    let widths: Vec<usize> = headers.iter().zip(&values).map(|(h, v)| h.len().max(v.len())).collect();
    let mut out = format!("mode: {}  instances: {}\n", report.mode, report.count);
    for (row, items) in [(0, headers.map(String::from).to_vec()), (1, values.to_vec())] {
        let line: Vec<String> = items.iter().zip(&widths).map(|(s, &w)| format!("{s:<w$}")).collect();
        let _ = writeln!(out, "{}", line.join(" | ").trim_end());
        if row == 0 {
            let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
            let _ = writeln!(out, "{}", rule.join("-+-"));
        }
    }
    out
}
