//! Single-keyword query execution.
//!
//! A query orders the requester's peers by certainty factor, examines a
//! budgeted prefix, and feeds the outcome back into the metaknowledge store
//! through three evidence rules:
//!
//! * requester rating: the requester reads every returned document and the
//!   maximum relevance becomes a fully reliable degree of support;
//! * owner mirror: an owner who served documents nudges its own belief
//!   about the requester upward with low reliability (the requester may be
//!   collecting in this area);
//! * empty result: an examined owner with nothing on the keyword yields a
//!   pure contradiction at moderate reliability.

use std::collections::{BTreeMap, BTreeSet};

use crate::calculus::{CertaintyFactor, Evidence, PolicyParams};
use crate::corpus::{Corpus, DocId, Document};
use crate::error::{Error, Result};
use crate::metaknowledge::{Keyword, MetaKey, MetaknowledgeStore, UserId};

/// A request for documents carrying one keyword.
#[derive(Clone, Debug, PartialEq)]
pub struct Query {
    pub requester: UserId,
    pub keyword: Keyword,
    pub issued_at: u64,
}

fn check_unit(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::OutOfRange { name, value })
    }
}

/// Knobs for query execution and evidence reliability.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EngineConfig {
    examine_budget: usize,
    relevance_threshold: f64,
    q_requester: f64,
    q_owner: f64,
    q_empty: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            examine_budget: 3,
            relevance_threshold: 0.5,
            q_requester: 1.0,
            q_owner: 0.1,
            q_empty: 0.5,
        }
    }
}

impl EngineConfig {
    pub fn new(
        examine_budget: usize,
        relevance_threshold: f64,
        q_requester: f64,
        q_owner: f64,
        q_empty: f64,
    ) -> Result<Self> {
        if examine_budget == 0 {
            return Err(Error::scenario("engine.examine_budget", "must be positive"));
        }
        Ok(EngineConfig {
            examine_budget,
            relevance_threshold: check_unit("relevance_threshold", relevance_threshold)?,
            q_requester: check_unit("q_requester", q_requester)?,
            q_owner: check_unit("q_owner", q_owner)?,
            q_empty: check_unit("q_empty", q_empty)?,
        })
    }

    pub fn examine_budget(&self) -> usize {
        self.examine_budget
    }

    pub fn relevance_threshold(&self) -> f64 {
        self.relevance_threshold
    }

    pub fn q_requester(&self) -> f64 {
        self.q_requester
    }

    pub fn q_owner(&self) -> f64 {
        self.q_owner
    }

    pub fn q_empty(&self) -> f64 {
        self.q_empty
    }
}

/// One applied revision: which key, what evidence, and the value before and
/// after.
#[derive(Clone, Debug, PartialEq)]
pub struct EvidenceRecord {
    pub key: MetaKey,
    pub evidence: Evidence,
    pub old_cf: CertaintyFactor,
    pub new_cf: CertaintyFactor,
}

/// Everything a single query produced.
#[derive(Clone, Debug, PartialEq)]
pub struct QueryOutcome {
    /// All peer owners, most promising first.
    pub examination_order: Vec<UserId>,
    /// The budgeted prefix of `examination_order` actually visited.
    pub examined: Vec<UserId>,
    /// Matching doc ids per visited collection, including the requester's own.
    pub per_owner_results: BTreeMap<UserId, BTreeSet<DocId>>,
    /// Revisions in application order.
    pub evidence_log: Vec<EvidenceRecord>,
    /// Peers examined until the first relevant document, or all examined
    /// peers when the budget ran out without one.
    pub search_length: usize,
    /// Fraction of the first examined peer's returned documents that are
    /// relevant to the requester; undefined when nothing was returned there.
    pub precision_at_1: Option<f64>,
}

/// Requester-side evidence: the requester rates every returned document and
/// the maximum relevance supports the key (requester, owner, keyword).
pub fn requester_rating_evidence(
    requester: UserId,
    owner: UserId,
    keyword: &Keyword,
    returned: &[&Document],
    q_requester: f64,
) -> Result<(MetaKey, Evidence)> {
    if returned.is_empty() {
        return Err(Error::EmptyResult);
    }
    let mut degree: f64 = 0.0;
    for doc in returned {
        degree = degree.max(doc.relevance_to(requester)?);
    }
    let key = MetaKey::new(requester, owner, keyword.clone())?;
    Ok((key, Evidence::new(degree, q_requester)?))
}

/// Owner-side evidence: serving at least one document fully supports the
/// mirrored key (owner, requester, keyword) at low reliability.
pub fn owner_mirror_evidence(
    requester: UserId,
    owner: UserId,
    keyword: &Keyword,
    q_owner: f64,
) -> Result<(MetaKey, Evidence)> {
    let key = MetaKey::new(owner, requester, keyword.clone())?;
    Ok((key, Evidence::new(1.0, q_owner)?))
}

/// Empty-result evidence: an examined owner with no matching documents
/// contradicts the key (requester, owner, keyword).
pub fn empty_result_evidence(
    requester: UserId,
    owner: UserId,
    keyword: &Keyword,
    q_empty: f64,
) -> Result<(MetaKey, Evidence)> {
    let key = MetaKey::new(requester, owner, keyword.clone())?;
    Ok((key, Evidence::new(0.0, q_empty)?))
}

/// Runs one query against the corpus and applies its evidence to the store.
///
/// Evidence is applied sequentially in examination order, so each revision
/// reads the value produced by any earlier revision in the same query.
pub fn execute_query(
    query: &Query,
    corpus: &Corpus,
    store: &mut MetaknowledgeStore,
    config: &EngineConfig,
    policy: PolicyParams,
) -> Result<QueryOutcome> {
    if !corpus.users().contains(&query.requester) {
        return Err(Error::UnknownUser(query.requester));
    }
    if !corpus.keywords().contains(&query.keyword) {
        return Err(Error::UnknownKeyword(query.keyword.as_str().to_string()));
    }

    let mut per_owner_results: BTreeMap<UserId, BTreeSet<DocId>> = BTreeMap::new();

    // the requester's own collection is read first and yields no evidence
    let own = corpus.matching_docs(query.requester, &query.keyword)?;
    per_owner_results.insert(
        query.requester,
        own.iter().map(|d| d.doc_id()).collect(),
    );

    let peers: Vec<UserId> = corpus
        .users()
        .iter()
        .copied()
        .filter(|&u| u != query.requester)
        .collect();
    let examination_order = store.order_owners(query.requester, &query.keyword, &peers)?;
    let examined: Vec<UserId> = examination_order
        .iter()
        .copied()
        .take(config.examine_budget)
        .collect();

    let mut evidence_log = Vec::new();
    let mut apply = |store: &mut MetaknowledgeStore, key: MetaKey, evidence: Evidence| {
        let old_cf = store.get_cf(&key);
        let new_cf = store.apply_evidence(&key, evidence, policy);
        evidence_log.push(EvidenceRecord {
            key,
            evidence,
            old_cf,
            new_cf,
        });
    };

    let mut search_length = 0;
    let mut found_relevant = false;
    let mut precision_at_1 = None;

    for (position, &owner) in examined.iter().enumerate() {
        let returned = corpus.matching_docs(owner, &query.keyword)?;
        per_owner_results.insert(owner, returned.iter().map(|d| d.doc_id()).collect());

        let mut any_relevant = false;
        let mut relevant_count = 0usize;
        for doc in &returned {
            if doc.relevance_to(query.requester)? >= config.relevance_threshold {
                any_relevant = true;
                relevant_count += 1;
            }
        }

        if position == 0 && !returned.is_empty() {
            precision_at_1 = Some(relevant_count as f64 / returned.len() as f64);
        }
        if !found_relevant {
            search_length = position + 1;
            found_relevant = any_relevant;
        }

        if returned.is_empty() {
            let (key, evidence) =
                empty_result_evidence(query.requester, owner, &query.keyword, config.q_empty)?;
            apply(store, key, evidence);
        } else {
            let (key, evidence) = requester_rating_evidence(
                query.requester,
                owner,
                &query.keyword,
                &returned,
                config.q_requester,
            )?;
            apply(store, key, evidence);
            let (key, evidence) =
                owner_mirror_evidence(query.requester, owner, &query.keyword, config.q_owner)?;
            apply(store, key, evidence);
        }
    }

    Ok(QueryOutcome {
        examination_order,
        examined,
        per_owner_results,
        evidence_log,
        search_length,
        precision_at_1,
    })
}
