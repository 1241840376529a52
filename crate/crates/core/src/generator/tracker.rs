use rand::Rng;
use serde::Serialize;

use super::{BalanceDim, GenConfig, Instance};
use crate::language::Terminology;
use crate::spatial::{QueryType, Relation};

/// Accepted counts for one balance dimension.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimCounts {
    pub dim: BalanceDim,
    pub categories: Vec<String>,
    pub targets: Vec<f64>,
    pub counts: Vec<usize>,
}

impl DimCounts {
    fn shares(&self, total: usize, extra: Option<usize>) -> Vec<f64> {
        let denom = (total + usize::from(extra.is_some())) as f64;
        self.counts
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let c = c + usize::from(extra == Some(i));
                if denom == 0.0 {
                    0.0
                } else {
                    c as f64 / denom
                }
            })
            .collect()
    }

    /// L2 distance between category shares and targets, optionally with one
    /// more item counted in category `extra`.
    pub fn deviation(&self, total: usize, extra: Option<usize>) -> f64 {
        self.shares(total, extra)
            .iter()
            .zip(&self.targets)
            .map(|(s, t)| (s - t).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// Running category counts over accepted instances.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tracker {
    dims: Vec<DimCounts>,
    total: usize,
}

impl Tracker {
    pub fn new(config: &GenConfig) -> Self {
        let mut dims = Vec::new();
        for &dim in &config.balance_dims {
            if dims.iter().any(|d: &DimCounts| d.dim == dim) {
                continue;
            }
            let (categories, targets): (Vec<String>, Vec<f64>) = match dim {
                BalanceDim::QueryType => QueryType::ALL
                    .iter()
                    .zip(&config.query_type_weights)
                    .map(|(q, &w)| (q.as_str().to_string(), w))
                    .unzip(),
                BalanceDim::Terminology => Terminology::ALL
                    .iter()
                    .zip(&config.terminology_weights)
                    .map(|(t, &w)| (t.as_str().to_string(), w))
                    .unzip(),
                BalanceDim::NumComponents => {
                    let [lo, hi] = config.component_range;
                    let share = 1.0 / (hi - lo + 1) as f64;
                    (lo..=hi).map(|n| (n.to_string(), share)).unzip()
                }
                BalanceDim::Label => Relation::ALL
                    .iter()
                    .map(|&l| (l.as_str().to_string(), label_target(l, &config.query_type_weights)))
                    .unzip(),
            };
            let counts = vec![0; categories.len()];
            dims.push(DimCounts {
                dim,
                categories,
                targets,
                counts,
            });
        }
        Tracker { dims, total: 0 }
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn dims(&self) -> &[DimCounts] {
        &self.dims
    }

    pub fn dim(&self, dim: BalanceDim) -> Option<&DimCounts> {
        self.dims.iter().find(|d| d.dim == dim)
    }

    /// Category index of `instance` for every tracked dimension, in
    /// [`Tracker::dims`] order.
    pub fn categories_of(&self, instance: &Instance, config: &GenConfig) -> Vec<usize> {
        self.dims
            .iter()
            .map(|d| category_index(d.dim, instance, config))
            .collect()
    }

    /// Summed deviation increase caused by accepting an item with the given
    /// categories.
    pub fn delta(&self, categories: &[usize]) -> f64 {
        self.dims
            .iter()
            .zip(categories)
            .map(|(d, &c)| (d.deviation(self.total, Some(c)) - d.deviation(self.total, None)).max(0.0))
            .sum()
    }

    pub fn record(&mut self, categories: &[usize]) {
        for (d, &c) in self.dims.iter_mut().zip(categories) {
            d.counts[c] += 1;
        }
        self.total += 1;
    }

    /// Category furthest below its target share. Ties go to the first.
    pub fn most_deficient(&self, dim: BalanceDim) -> Option<usize> {
        self.most_deficient_among(dim, |_| true)
    }

    pub fn most_deficient_among(&self, dim: BalanceDim, allowed: impl Fn(usize) -> bool) -> Option<usize> {
        let d = self.dim(dim)?;
        let shares = d.shares(self.total, None);
        let mut best: Option<(usize, f64)> = None;
        for i in (0..d.counts.len()).filter(|&i| allowed(i)) {
            let gap = d.targets[i] - shares[i];
            if best.is_none_or(|(_, g)| gap > g) {
                best = Some((i, gap));
            }
        }
        best.map(|(i, _)| i)
    }
}

/// A label's expected share when query types follow `weights` and each type
/// spreads evenly over its own answer set.
fn label_target(label: Relation, weights: &[f64]) -> f64 {
    QueryType::ALL
        .iter()
        .zip(weights)
        .filter(|(q, _)| q.labels().contains(&label))
        .map(|(q, &w)| w / q.labels().len() as f64)
        .sum()
}

fn category_index(dim: BalanceDim, instance: &Instance, config: &GenConfig) -> usize {
    match dim {
        BalanceDim::QueryType => QueryType::ALL.iter().position(|&q| q == instance.query_type),
        BalanceDim::Terminology => Terminology::ALL.iter().position(|&t| t == instance.terminology),
        BalanceDim::NumComponents => instance.num_components.checked_sub(config.component_range[0]),
        BalanceDim::Label => Relation::ALL.iter().position(|&l| l == instance.label),
    }
    .expect("instance category lies inside the configured ranges")
}

/// `min(cap, c * delta^2)` for a positive deviation increase, else 0.
pub fn rejection_probability(delta: f64, config: &GenConfig) -> f64 {
    if delta <= 0.0 {
        0.0
    } else {
        (config.balance_strength * delta * delta).min(config.reject_cap)
    }
}

/// Accepts or rejects `instance`, recording it in `tracker` on acceptance.
pub fn balance_gate<R: Rng + ?Sized>(tracker: &mut Tracker, instance: &Instance, config: &GenConfig, rng: &mut R) -> bool {
    let cats = tracker.categories_of(instance, config);
    if tracker.total > 0 {
        let p = rejection_probability(tracker.delta(&cats), config);
        if p > 0.0 && rng.random::<f64>() < p {
            return false;
        }
    }
    tracker.record(&cats);
    true
}
