//! Seeded end-to-end scenario runs.
//!
//! A run is a pure function of the scenario value: corpus generation and
//! query sampling draw from independent substreams of the scenario seed, so
//! adding events never perturbs the query sequence. Events fire before the
//! query at their index; metrics are sampled every `tick_every` queries and
//! at the start and end of the run.

use std::collections::BTreeSet;

use crate::corpus::{expand_schedule, Corpus, Document};
use crate::curve::{CurveRow, LearningCurve};
use crate::engine::{execute_query, Query};
use crate::error::{Error, Result};
use crate::metaknowledge::{distance, Keyword, MetaKey, MetaknowledgeStore, UserId};
use crate::rng::{mix, DetRng};
use crate::scenario::{CorpusInit, GeneratorSpec, Scenario};

const CORPUS_SALT: u64 = 0x636f_7270;
const WORKLOAD_SALT: u64 = 0x776f_726b;

/// Generates the seeded corpus: per document, `keywords_per_doc` distinct
/// keywords drawn from the owner's categorical weights, then one uniform
/// relevance value per user. Document ids are assigned sequentially.
pub fn generate_corpus(
    users: &[UserId],
    keywords: &[Keyword],
    spec: &GeneratorSpec,
    rng: &mut DetRng,
) -> Result<Corpus> {
    let mut corpus = Corpus::new(
        users.iter().copied().collect(),
        keywords.iter().cloned().collect(),
    );
    let mut next_id = 0u64;
    for &owner in users {
        let weights = spec
            .keyword_weights
            .get(&owner)
            .ok_or_else(|| Error::scenario("corpus.generate", format!("no weights for {owner}")))?;
        for _ in 0..spec.docs_per_user {
            let mut remaining = weights.clone();
            let mut doc_keywords = BTreeSet::new();
            for _ in 0..spec.keywords_per_doc {
                if !remaining.iter().any(|&w| w > 0.0) {
                    break;
                }
                let index = rng.pick_weighted(&remaining);
                remaining[index] = 0.0;
                doc_keywords.insert(keywords[index].clone());
            }
            let relevance = users
                .iter()
                .map(|&user| (user, rng.next_f64()))
                .collect();
            let document = Document::new(
                crate::corpus::DocId::new(next_id),
                owner,
                doc_keywords,
                relevance,
            )?;
            next_id += 1;
            corpus.insert(document)?;
        }
    }
    Ok(corpus)
}

/// Builds the initial corpus for a scenario, explicit or generated. The
/// generated form is a deterministic function of the scenario seed.
pub fn materialize_corpus(scenario: &Scenario) -> Result<Corpus> {
    match scenario.corpus_init() {
        CorpusInit::Explicit(documents) => {
            let mut corpus = Corpus::new(
                scenario.users().iter().copied().collect(),
                scenario.keywords().iter().cloned().collect(),
            );
            for document in documents {
                corpus.insert(document.clone())?;
            }
            Ok(corpus)
        }
        CorpusInit::Generate(spec) => {
            let mut rng = DetRng::new(mix(scenario.seed(), CORPUS_SALT));
            generate_corpus(scenario.users(), scenario.keywords(), spec, &mut rng)
        }
    }
}

/// Samples query `index`: requester uniform over users, keyword from the
/// requester's interest weights. Deterministic per (seed, index).
pub fn draw_query(scenario: &Scenario, index: u64) -> Query {
    let mut rng = DetRng::new(mix(mix(scenario.seed(), WORKLOAD_SALT), index));
    let users = scenario.users();
    let requester = users[rng.pick(users.len())];
    let weights = &scenario.workload().interests[&requester];
    let keyword = scenario.keywords()[rng.pick_weighted(weights)].clone();
    Query {
        requester,
        keyword,
        issued_at: index,
    }
}

/// Every ordered (observer, owner, keyword) key of the scenario, the domain
/// the actual-vs-ideal distance is averaged over.
pub fn metakey_domain(scenario: &Scenario) -> BTreeSet<MetaKey> {
    let mut domain = BTreeSet::new();
    for &observer in scenario.users() {
        for &owner in scenario.users() {
            if observer == owner {
                continue;
            }
            for keyword in scenario.keywords() {
                domain.insert(
                    MetaKey::new(observer, owner, keyword.clone()).expect("observer != owner"),
                );
            }
        }
    }
    domain
}

/// Whole-run aggregates.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub queries: u64,
    pub events_fired: usize,
    pub initial_distance: f64,
    pub final_distance: f64,
    /// Mean precision over queries where it was defined.
    pub mean_precision: Option<f64>,
    pub mean_search_length: f64,
}

/// Result of [`run`]: the sampled learning curve, the final store, and
/// summary aggregates.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub curve: LearningCurve,
    pub final_store: MetaknowledgeStore,
    pub summary: RunSummary,
}

#[derive(Default)]
struct MetricWindow {
    precision_sum: f64,
    precision_count: u64,
    search_length_sum: f64,
    search_length_count: u64,
}

impl MetricWindow {
    fn record(&mut self, precision: Option<f64>, search_length: usize) {
        if let Some(p) = precision {
            self.precision_sum += p;
            self.precision_count += 1;
        }
        self.search_length_sum += search_length as f64;
        self.search_length_count += 1;
    }

    fn precision(&self) -> Option<f64> {
        (self.precision_count > 0).then(|| self.precision_sum / self.precision_count as f64)
    }

    fn search_length(&self) -> Option<f64> {
        (self.search_length_count > 0)
            .then(|| self.search_length_sum / self.search_length_count as f64)
    }
}

/// Executes the scenario: fires due events before each query, runs the
/// query, and samples metrics every `tick_every` queries plus at indices 0
/// and N. The full schedule is dry-run against a copy of the initial corpus
/// first, so broken event references surface before any query executes.
pub fn run(scenario: &Scenario) -> Result<RunOutput> {
    let mut corpus = materialize_corpus(scenario)?;
    let schedule = expand_schedule(scenario.events());

    let mut probe = corpus.clone();
    for scheduled in &schedule {
        probe.apply_event(scheduled.event.clone()).map_err(|e| {
            Error::scenario("events", format!("at fire_at {}: {e}", scheduled.fire_at))
        })?;
    }

    let domain = metakey_domain(scenario);
    let mut store = MetaknowledgeStore::default();
    let mut curve = LearningCurve::default();

    let initial_distance = distance(&store, &corpus.ideal_metaknowledge(), &domain)?;
    curve.push(CurveRow {
        query_index: 0,
        distance: initial_distance,
        precision_window: None,
        mean_search_length_window: None,
    });

    let queries = scenario.workload().queries;
    let tick_every = scenario.tick_every();
    let mut window = MetricWindow::default();
    let mut totals = MetricWindow::default();
    let mut events_fired = 0usize;
    let mut next_event = 0usize;

    for index in 1..=queries {
        while next_event < schedule.len() && schedule[next_event].fire_at == index {
            corpus.apply_event(schedule[next_event].event.clone())?;
            next_event += 1;
            events_fired += 1;
        }

        let query = draw_query(scenario, index);
        let outcome = execute_query(&query, &corpus, &mut store, &scenario.engine(), scenario.policy())?;
        window.record(outcome.precision_at_1, outcome.search_length);
        totals.record(outcome.precision_at_1, outcome.search_length);

        if index % tick_every == 0 || index == queries {
            let d = distance(&store, &corpus.ideal_metaknowledge(), &domain)?;
            curve.push(CurveRow {
                query_index: index,
                distance: d,
                precision_window: window.precision(),
                mean_search_length_window: window.search_length(),
            });
            window = MetricWindow::default();
        }
    }

    let final_distance = curve.rows().last().expect("at least the zero row").distance;
    let summary = RunSummary {
        queries,
        events_fired,
        initial_distance,
        final_distance,
        mean_precision: totals.precision(),
        mean_search_length: totals.search_length().unwrap_or(0.0),
    };

    Ok(RunOutput {
        curve,
        final_store: store,
        summary,
    })
}
