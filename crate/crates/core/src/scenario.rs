//! Scenario files: loading, validation, and the domain representation.
//!
//! A scenario is one JSON document with top-level keys `users`, `keywords`,
//! `corpus`, `events`, `workload`, `seed`, `policy`, `engine`, `tick_every`.
//! Under `corpus`, exactly one of `documents` (explicit corpus) or
//! `generate` (seed-driven generator) must be present. Validation failures
//! name the offending field.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::Deserialize;

use crate::calculus::PolicyParams;
use crate::corpus::{CorpusEvent, DocId, Document, ScheduledEvent};
use crate::engine::EngineConfig;
use crate::error::{Error, Result};
use crate::metaknowledge::{Keyword, UserId};

const DEFAULT_TICK_EVERY: u64 = 10;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    users: UsersFile,
    keywords: Vec<String>,
    corpus: CorpusFile,
    #[serde(default)]
    events: Vec<EventFile>,
    workload: WorkloadFile,
    seed: u64,
    #[serde(default)]
    policy: PolicyFile,
    #[serde(default)]
    engine: EngineFile,
    #[serde(default = "default_tick_every")]
    tick_every: u64,
}

fn default_tick_every() -> u64 {
    DEFAULT_TICK_EVERY
}

#[derive(Deserialize)]
#[serde(untagged)]
enum UsersFile {
    Count(u32),
    List(Vec<u32>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CorpusFile {
    #[serde(default)]
    documents: Option<Vec<DocumentFile>>,
    #[serde(default)]
    generate: Option<GeneratorFile>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DocumentFile {
    doc_id: u64,
    owner: u32,
    keywords: Vec<String>,
    relevance: BTreeMap<String, f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneratorFile {
    docs_per_user: u32,
    keywords_per_doc: u32,
    /// Per-user categorical keyword weights; users left out draw uniformly.
    #[serde(default)]
    keyword_weights: BTreeMap<String, BTreeMap<String, f64>>,
}

#[derive(Deserialize)]
struct EventFile {
    fire_at: u64,
    #[serde(flatten)]
    kind: EventKindFile,
}

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum EventKindFile {
    Add {
        document: DocumentFile,
    },
    Delete {
        doc: u64,
    },
    Copy {
        doc: u64,
        new_owner: u32,
    },
    RelocateDirect {
        doc: u64,
        new_owner: u32,
    },
    RelocateIndirect {
        doc: u64,
        new_owner: u32,
        delete_delay: u64,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WorkloadFile {
    queries: u64,
    /// Per-user keyword-interest weights; users left out draw uniformly.
    #[serde(default)]
    interests: BTreeMap<String, BTreeMap<String, f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PolicyFile {
    #[serde(default = "default_rate")]
    rate_up: f64,
    #[serde(default = "default_rate")]
    rate_down: f64,
}

fn default_rate() -> f64 {
    0.3
}

impl Default for PolicyFile {
    fn default() -> Self {
        PolicyFile {
            rate_up: default_rate(),
            rate_down: default_rate(),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EngineFile {
    #[serde(default = "default_budget")]
    examine_budget: usize,
    #[serde(default = "default_threshold")]
    relevance_threshold: f64,
    #[serde(default = "default_q_requester")]
    q_requester: f64,
    #[serde(default = "default_q_owner")]
    q_owner: f64,
    #[serde(default = "default_q_empty")]
    q_empty: f64,
}

fn default_budget() -> usize {
    3
}
fn default_threshold() -> f64 {
    0.5
}
fn default_q_requester() -> f64 {
    1.0
}
fn default_q_owner() -> f64 {
    0.1
}
fn default_q_empty() -> f64 {
    0.5
}

impl Default for EngineFile {
    fn default() -> Self {
        EngineFile {
            examine_budget: default_budget(),
            relevance_threshold: default_threshold(),
            q_requester: default_q_requester(),
            q_owner: default_q_owner(),
            q_empty: default_q_empty(),
        }
    }
}

/// How the initial corpus comes to be.
#[derive(Clone, Debug)]
pub enum CorpusInit {
    Explicit(Vec<Document>),
    Generate(GeneratorSpec),
}

/// Seed-driven corpus generator parameters. Keyword weights are aligned to
/// the scenario's sorted keyword list, one row per user.
#[derive(Clone, Debug)]
pub struct GeneratorSpec {
    pub docs_per_user: u32,
    pub keywords_per_doc: u32,
    pub keyword_weights: BTreeMap<UserId, Vec<f64>>,
}

/// Query mix: total query count plus per-user keyword-interest weights
/// aligned to the scenario's sorted keyword list.
#[derive(Clone, Debug)]
pub struct Workload {
    pub queries: u64,
    pub interests: BTreeMap<UserId, Vec<f64>>,
}

/// A fully validated simulation input. Construction goes through
/// [`Scenario::from_json`] or [`Scenario::from_file`]; run output is a pure
/// function of this value.
#[derive(Clone, Debug)]
pub struct Scenario {
    users: Vec<UserId>,
    keywords: Vec<Keyword>,
    corpus_init: CorpusInit,
    events: Vec<ScheduledEvent>,
    workload: Workload,
    seed: u64,
    policy: PolicyParams,
    engine: EngineConfig,
    tick_every: u64,
}

impl Scenario {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Scenario::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ScenarioFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Scenario::from_parts(file)
    }

    /// Replaces the seed, e.g. from a command-line override.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn users(&self) -> &[UserId] {
        &self.users
    }

    pub fn keywords(&self) -> &[Keyword] {
        &self.keywords
    }

    pub fn corpus_init(&self) -> &CorpusInit {
        &self.corpus_init
    }

    pub fn events(&self) -> &[ScheduledEvent] {
        &self.events
    }

    pub fn workload(&self) -> &Workload {
        &self.workload
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn policy(&self) -> PolicyParams {
        self.policy
    }

    pub fn engine(&self) -> EngineConfig {
        self.engine
    }

    pub fn tick_every(&self) -> u64 {
        self.tick_every
    }

    fn from_parts(file: ScenarioFile) -> Result<Self> {
        let users = parse_users(file.users)?;
        let user_set: BTreeSet<UserId> = users.iter().copied().collect();
        let keywords = parse_keywords(&file.keywords)?;

        let corpus_init = parse_corpus(file.corpus, &users, &user_set, &keywords)?;
        let events = parse_events(file.events, &user_set)?;
        let workload = parse_workload(file.workload, &users, &keywords)?;

        let policy = PolicyParams::new(file.policy.rate_up, file.policy.rate_down)
            .map_err(|e| Error::scenario("policy", e.to_string()))?;
        let engine = EngineConfig::new(
            file.engine.examine_budget,
            file.engine.relevance_threshold,
            file.engine.q_requester,
            file.engine.q_owner,
            file.engine.q_empty,
        )
        .map_err(|e| Error::scenario("engine", e.to_string()))?;

        if file.tick_every == 0 {
            return Err(Error::scenario("tick_every", "must be at least 1"));
        }

        Ok(Scenario {
            users,
            keywords,
            corpus_init,
            events,
            workload,
            seed: file.seed,
            policy,
            engine,
            tick_every: file.tick_every,
        })
    }
}

fn parse_users(file: UsersFile) -> Result<Vec<UserId>> {
    let ids = match file {
        UsersFile::Count(n) => {
            if n == 0 {
                return Err(Error::scenario("users", "need at least one user"));
            }
            (0..n).map(UserId::new).collect()
        }
        UsersFile::List(list) => {
            if list.is_empty() {
                return Err(Error::scenario("users", "need at least one user"));
            }
            let set: BTreeSet<u32> = list.iter().copied().collect();
            if set.len() != list.len() {
                return Err(Error::scenario("users", "user ids must be unique"));
            }
            set.into_iter().map(UserId::new).collect()
        }
    };
    Ok(ids)
}

fn parse_keywords(tokens: &[String]) -> Result<Vec<Keyword>> {
    if tokens.is_empty() {
        return Err(Error::scenario("keywords", "need at least one keyword"));
    }
    let mut keywords = BTreeSet::new();
    for token in tokens {
        let keyword =
            Keyword::new(token).map_err(|e| Error::scenario("keywords", e.to_string()))?;
        if !keywords.insert(keyword) {
            return Err(Error::scenario(
                "keywords",
                format!("duplicate keyword {token:?} after normalization"),
            ));
        }
    }
    Ok(keywords.into_iter().collect())
}

fn parse_user_key(field: &str, key: &str, users: &BTreeSet<UserId>) -> Result<UserId> {
    let id: u32 = key
        .parse()
        .map_err(|_| Error::scenario(field, format!("bad user id key {key:?}")))?;
    let user = UserId::new(id);
    if !users.contains(&user) {
        return Err(Error::scenario(field, format!("unknown user {id}")));
    }
    Ok(user)
}

/// Turns a `keyword -> weight` map into a weight row aligned to the sorted
/// keyword list, checking every referenced keyword exists and at least one
/// weight is positive.
fn aligned_weights(
    field: &str,
    map: &BTreeMap<String, f64>,
    keywords: &[Keyword],
) -> Result<Vec<f64>> {
    let mut row = vec![0.0; keywords.len()];
    for (token, &weight) in map {
        let keyword =
            Keyword::new(token).map_err(|e| Error::scenario(field, e.to_string()))?;
        let index = keywords
            .binary_search(&keyword)
            .map_err(|_| Error::scenario(field, format!("unknown keyword {token:?}")))?;
        if !weight.is_finite() || weight < 0.0 {
            return Err(Error::scenario(
                field,
                format!("weight for {token:?} must be finite and nonnegative, got {weight}"),
            ));
        }
        row[index] = weight;
    }
    if !row.iter().any(|&w| w > 0.0) {
        return Err(Error::scenario(field, "needs at least one positive weight"));
    }
    Ok(row)
}

fn parse_document(field: &str, file: &DocumentFile, users: &BTreeSet<UserId>) -> Result<Document> {
    let mut keywords = BTreeSet::new();
    for token in &file.keywords {
        keywords.insert(Keyword::new(token).map_err(|e| Error::scenario(field, e.to_string()))?);
    }
    let mut relevance = BTreeMap::new();
    for (key, &value) in &file.relevance {
        let user = parse_user_key(&format!("{field}.relevance"), key, users)?;
        relevance.insert(user, value);
    }
    Document::new(
        DocId::new(file.doc_id),
        UserId::new(file.owner),
        keywords,
        relevance,
    )
}

fn parse_corpus(
    file: CorpusFile,
    users: &[UserId],
    user_set: &BTreeSet<UserId>,
    keywords: &[Keyword],
) -> Result<CorpusInit> {
    match (file.documents, file.generate) {
        (Some(_), Some(_)) | (None, None) => Err(Error::scenario(
            "corpus",
            "specify exactly one of `documents` or `generate`",
        )),
        (Some(docs), None) => {
            let documents = docs
                .iter()
                .enumerate()
                .map(|(i, d)| parse_document(&format!("corpus.documents[{i}]"), d, user_set))
                .collect::<Result<Vec<_>>>()?;
            Ok(CorpusInit::Explicit(documents))
        }
        (None, Some(gen)) => {
            if gen.docs_per_user > 0
                && (gen.keywords_per_doc == 0 || gen.keywords_per_doc as usize > keywords.len())
            {
                return Err(Error::scenario(
                    "corpus.generate.keywords_per_doc",
                    format!(
                        "must lie in [1, {}], got {}",
                        keywords.len(),
                        gen.keywords_per_doc
                    ),
                ));
            }
            let mut keyword_weights = BTreeMap::new();
            for (key, weights) in &gen.keyword_weights {
                let user = parse_user_key("corpus.generate.keyword_weights", key, user_set)?;
                let row = aligned_weights(
                    &format!("corpus.generate.keyword_weights.{key}"),
                    weights,
                    keywords,
                )?;
                keyword_weights.insert(user, row);
            }
            for &user in users {
                keyword_weights
                    .entry(user)
                    .or_insert_with(|| vec![1.0; keywords.len()]);
            }
            Ok(CorpusInit::Generate(GeneratorSpec {
                docs_per_user: gen.docs_per_user,
                keywords_per_doc: gen.keywords_per_doc,
                keyword_weights,
            }))
        }
    }
}

fn parse_events(files: Vec<EventFile>, users: &BTreeSet<UserId>) -> Result<Vec<ScheduledEvent>> {
    let mut events = Vec::with_capacity(files.len());
    for (i, file) in files.iter().enumerate() {
        let field = format!("events[{i}]");
        if file.fire_at == 0 {
            return Err(Error::scenario(
                format!("{field}.fire_at"),
                "query indices start at 1",
            ));
        }
        let check_owner = |owner: u32| -> Result<UserId> {
            let user = UserId::new(owner);
            if !users.contains(&user) {
                return Err(Error::scenario(
                    format!("{field}.new_owner"),
                    format!("unknown user {owner}"),
                ));
            }
            Ok(user)
        };
        let event = match &file.kind {
            EventKindFile::Add { document } => {
                CorpusEvent::Add(parse_document(&format!("{field}.document"), document, users)?)
            }
            EventKindFile::Delete { doc } => CorpusEvent::Delete(DocId::new(*doc)),
            EventKindFile::Copy { doc, new_owner } => CorpusEvent::Copy {
                doc: DocId::new(*doc),
                new_owner: check_owner(*new_owner)?,
            },
            EventKindFile::RelocateDirect { doc, new_owner } => CorpusEvent::RelocateDirect {
                doc: DocId::new(*doc),
                new_owner: check_owner(*new_owner)?,
            },
            EventKindFile::RelocateIndirect {
                doc,
                new_owner,
                delete_delay,
            } => CorpusEvent::RelocateIndirect {
                doc: DocId::new(*doc),
                new_owner: check_owner(*new_owner)?,
                delete_delay: *delete_delay,
            },
        };
        events.push(ScheduledEvent {
            fire_at: file.fire_at,
            event,
        });
    }
    Ok(events)
}

fn parse_workload(file: WorkloadFile, users: &[UserId], keywords: &[Keyword]) -> Result<Workload> {
    if file.queries == 0 {
        return Err(Error::scenario("workload.queries", "must be at least 1"));
    }
    let user_set: BTreeSet<UserId> = users.iter().copied().collect();
    let mut interests = BTreeMap::new();
    for (key, weights) in &file.interests {
        let user = parse_user_key("workload.interests", key, &user_set)?;
        let row = aligned_weights(&format!("workload.interests.{key}"), weights, keywords)?;
        interests.insert(user, row);
    }
    for &user in users {
        interests
            .entry(user)
            .or_insert_with(|| vec![1.0; keywords.len()]);
    }
    Ok(Workload {
        queries: file.queries,
        interests,
    })
}
