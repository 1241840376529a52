use std::collections::BTreeMap;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{balance_gate, build_connected_graph, sample_query, BalanceDim, GenConfig, GenError, QueryPolicy, Tracker};
use crate::ascii::{render, AsciiFormat};
use crate::language::{synthesize_description, Terminology};
use crate::spatial::{ambiguous_stage_count, Entity, Placement, QueryType, Relation, SpatialGraph};

/// Consecutive rejected candidates tolerated before generation gives up.
pub const MAX_CONSECUTIVE_REJECTIONS: usize = 10_000;

/// Probability of steering a parameter toward its most deficient category.
const BIAS_PROBABILITY: f64 = 0.5;

/// One generated dataset item.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub id: String,
    pub graph: SpatialGraph,
    pub placement: Placement,
    pub description: String,
    pub query: String,
    pub query_type: QueryType,
    pub subject: Entity,
    pub reference: Entity,
    pub label: Relation,
    pub terminology: Terminology,
    pub ascii: BTreeMap<AsciiFormat, String>,
    pub num_components: usize,
    pub num_relations: usize,
    pub is_directly_stated: bool,
    pub has_unique_layout: bool,
    pub ambiguous_stages: usize,
}

/// Seeded generator yielding accepted instances in order.
#[derive(Debug, Clone)]
pub struct Generator {
    config: GenConfig,
    rng: ChaCha8Rng,
    tracker: Tracker,
}

impl Generator {
    pub fn new(config: GenConfig) -> Result<Self, GenError> {
        config.validate()?;
        Ok(Generator {
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            tracker: Tracker::new(&config),
            config,
        })
    }

    pub fn config(&self) -> &GenConfig {
        &self.config
    }

    pub fn tracker(&self) -> &Tracker {
        &self.tracker
    }

    pub fn into_tracker(self) -> Tracker {
        self.tracker
    }

    /// Proposes candidates until one passes the balance gate.
    pub fn next_instance(&mut self) -> Result<Instance, GenError> {
        let id = format!("{:06}", self.tracker.total());
        for _ in 0..MAX_CONSECUTIVE_REJECTIONS {
            let candidate = match self.candidate(&id) {
                Ok(c) => c,
                Err(GenError::RetryExhausted(_) | GenError::NoAnswerablePair) => continue,
                Err(e) => return Err(e),
            };
            if balance_gate(&mut self.tracker, &candidate, &self.config, &mut self.rng) {
                return Ok(candidate);
            }
        }
        Err(GenError::NoProgress(MAX_CONSECUTIVE_REJECTIONS))
    }

    fn biased(&mut self, dim: BalanceDim) -> Option<usize> {
        if self.tracker.total() == 0 || !self.rng.random_bool(BIAS_PROBABILITY) {
            return None;
        }
        self.tracker.most_deficient(dim)
    }

    fn candidate(&mut self, id: &str) -> Result<Instance, GenError> {
        let [c_lo, c_hi] = self.config.component_range;
        let n = match self.biased(BalanceDim::NumComponents) {
            Some(i) => c_lo + i,
            None => self.rng.random_range(c_lo..=c_hi),
        };
        let (r_lo, r_hi) = self.config.relation_bounds(n).expect("validated config");
        let n_relations = self.rng.random_range(r_lo..=r_hi);

        let terminology = match self.biased(BalanceDim::Terminology) {
            Some(i) => Terminology::ALL[i],
            None => *Terminology::ALL
                .iter()
                .zip(&self.config.terminology_weights)
                .collect::<Vec<_>>()
                .choose_weighted(&mut self.rng, |(_, &w)| w)
                .expect("validated weights")
                .0,
        };

        let mut weights: [f64; 3] = self.config.query_type_weights[..].try_into().expect("validated length");
        if let Some(i) = self.biased(BalanceDim::QueryType) {
            weights = [0.0; 3];
            weights[i] = 1.0;
        }
        // A label preference only makes sense within one query type, so
        // fix the type first when steering the label.
        let mut policy = QueryPolicy { weights, label: None };
        if self.tracker.total() > 0 && self.rng.random_bool(BIAS_PROBABILITY) {
            let qi = *[0usize, 1, 2]
                .choose_weighted(&mut self.rng, |&i| weights[i])
                .expect("validated weights");
            let qt = QueryType::ALL[qi];
            let allowed = |i: usize| qt.labels().contains(&Relation::ALL[i]);
            if let Some(li) = self.tracker.most_deficient_among(BalanceDim::Label, allowed) {
                policy.weights = [0.0; 3];
                policy.weights[qi] = 1.0;
                policy.label = Some(Relation::ALL[li]);
            }
        }

        let scene = build_connected_graph(&mut self.rng, n, n_relations)?;
        let description = synthesize_description(&scene.edge_order, terminology, &mut self.rng);
        let pk = scene.graph.closure();
        let query = sample_query(&mut self.rng, &scene.graph, &pk, &policy)?;
        let ascii = self
            .config
            .formats
            .iter()
            .map(|&f| (f, render(&scene.placement, f)))
            .collect();
        let ambiguous_stages = ambiguous_stage_count(&scene.graph, &scene.edge_order)
            .expect("edge order comes from the builder");
        Ok(Instance {
            id: id.to_string(),
            num_components: n,
            num_relations: scene.graph.edges().len(),
            has_unique_layout: pk.has_unique_layout(),
            graph: scene.graph,
            placement: scene.placement,
            description,
            query: query.text,
            query_type: query.query_type,
            subject: query.subject,
            reference: query.reference,
            label: query.label,
            terminology,
            ascii,
            is_directly_stated: query.is_directly_stated,
            ambiguous_stages,
        })
    }
}

impl Iterator for Generator {
    type Item = Result<Instance, GenError>;

    fn next(&mut self) -> Option<Self::Item> {
        (self.tracker.total() < self.config.target_count).then(|| self.next_instance())
    }
}

/// Runs a generator to `target_count` and returns the instances with the
/// final tracker.
pub fn generate_dataset(config: &GenConfig) -> Result<(Vec<Instance>, Tracker), GenError> {
    let mut gen = Generator::new(config.clone())?;
    let mut out = Vec::with_capacity(config.target_count);
    for item in gen.by_ref() {
        out.push(item?);
    }
    Ok((out, gen.into_tracker()))
}
