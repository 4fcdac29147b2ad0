//! Documents, ground-truth relevance, and lifecycle dynamics.
//!
//! The corpus owns every document in a scenario and applies scheduled
//! lifecycle events: additions, deletions, copies, and direct or indirect
//! relocation. It also derives the ideal metaknowledge a perfectly informed
//! user would hold, which is what the learner's store is measured against.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::calculus::CertaintyFactor;
use crate::error::{Error, Result};
use crate::metaknowledge::{Keyword, MetaKey, MetaknowledgeStore, UserId};

/// Corpus-wide unique document identifier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DocId(u64);

impl DocId {
    pub fn new(id: u64) -> Self {
        DocId(id)
    }

    pub fn as_u64(self) -> u64 {
        self.0
    }
}

impl fmt::Display for DocId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A stored document: keyword descriptors plus fixed per-user ground-truth
/// relevance. Copies carry a provenance link to their source.
#[derive(Clone, Debug, PartialEq)]
pub struct Document {
    doc_id: DocId,
    owner: UserId,
    keywords: BTreeSet<Keyword>,
    relevance: BTreeMap<UserId, f64>,
    copied_from: Option<DocId>,
}

impl Document {
    pub fn new(
        doc_id: DocId,
        owner: UserId,
        keywords: BTreeSet<Keyword>,
        relevance: BTreeMap<UserId, f64>,
    ) -> Result<Self> {
        if keywords.is_empty() {
            return Err(Error::NoKeywords(doc_id));
        }
        for (&user, &value) in &relevance {
            if !value.is_finite() || !(0.0..=1.0).contains(&value) {
                return Err(Error::scenario(
                    format!("document {doc_id} relevance for user {user}"),
                    format!("must lie in [0, 1], got {value}"),
                ));
            }
        }
        Ok(Document {
            doc_id,
            owner,
            keywords,
            relevance,
            copied_from: None,
        })
    }

    pub fn doc_id(&self) -> DocId {
        self.doc_id
    }

    pub fn owner(&self) -> UserId {
        self.owner
    }

    pub fn keywords(&self) -> &BTreeSet<Keyword> {
        &self.keywords
    }

    pub fn has_keyword(&self, keyword: &Keyword) -> bool {
        self.keywords.contains(keyword)
    }

    pub fn relevance_to(&self, user: UserId) -> Result<f64> {
        self.relevance.get(&user).copied().ok_or(Error::MissingRelevance {
            doc: self.doc_id,
            user,
        })
    }

    pub fn copied_from(&self) -> Option<DocId> {
        self.copied_from
    }
}

/// One lifecycle change to the corpus.
#[derive(Clone, Debug, PartialEq)]
pub enum CorpusEvent {
    Add(Document),
    Delete(DocId),
    Copy { doc: DocId, new_owner: UserId },
    RelocateDirect { doc: DocId, new_owner: UserId },
    /// Copy now, delete the original `delete_delay` queries later. Must be
    /// expanded by [`expand_schedule`] before it reaches the corpus.
    RelocateIndirect {
        doc: DocId,
        new_owner: UserId,
        delete_delay: u64,
    },
}

/// Event tagged with the query index before which it fires.
#[derive(Clone, Debug, PartialEq)]
pub struct ScheduledEvent {
    pub fire_at: u64,
    pub event: CorpusEvent,
}

/// Rewrites indirect relocations into a copy plus a delayed delete of the
/// original, then orders the schedule by firing index. Expanded pieces keep
/// the indirect event's position among events at the same index.
pub fn expand_schedule(events: &[ScheduledEvent]) -> Vec<ScheduledEvent> {
    let mut expanded = Vec::with_capacity(events.len());
    for scheduled in events {
        match &scheduled.event {
            CorpusEvent::RelocateIndirect {
                doc,
                new_owner,
                delete_delay,
            } => {
                expanded.push(ScheduledEvent {
                    fire_at: scheduled.fire_at,
                    event: CorpusEvent::Copy {
                        doc: *doc,
                        new_owner: *new_owner,
                    },
                });
                expanded.push(ScheduledEvent {
                    fire_at: scheduled.fire_at.saturating_add(*delete_delay),
                    event: CorpusEvent::Delete(*doc),
                });
            }
            other => expanded.push(ScheduledEvent {
                fire_at: scheduled.fire_at,
                event: other.clone(),
            }),
        }
    }
    expanded.sort_by_key(|e| e.fire_at);
    expanded
}

/// All documents in a scenario plus its user set and keyword universe.
#[derive(Clone, Debug, PartialEq)]
pub struct Corpus {
    documents: BTreeMap<DocId, Document>,
    users: BTreeSet<UserId>,
    keywords: BTreeSet<Keyword>,
    next_doc_id: u64,
}

impl Corpus {
    pub fn new(users: BTreeSet<UserId>, keywords: BTreeSet<Keyword>) -> Self {
        Corpus {
            documents: BTreeMap::new(),
            users,
            keywords,
            next_doc_id: 0,
        }
    }

    pub fn users(&self) -> &BTreeSet<UserId> {
        &self.users
    }

    pub fn keywords(&self) -> &BTreeSet<Keyword> {
        &self.keywords
    }

    pub fn documents(&self) -> impl Iterator<Item = &Document> {
        self.documents.values()
    }

    pub fn document(&self, id: DocId) -> Option<&Document> {
        self.documents.get(&id)
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    /// Inserts a document, enforcing corpus-wide invariants: unique id,
    /// known owner, keywords inside the universe, relevance defined for
    /// every user.
    pub fn insert(&mut self, document: Document) -> Result<()> {
        if self.documents.contains_key(&document.doc_id) {
            return Err(Error::DuplicateDocument(document.doc_id));
        }
        if !self.users.contains(&document.owner) {
            return Err(Error::UnknownUser(document.owner));
        }
        for keyword in &document.keywords {
            if !self.keywords.contains(keyword) {
                return Err(Error::UnknownKeyword(keyword.as_str().to_string()));
            }
        }
        for &user in &self.users {
            document.relevance_to(user)?;
        }
        self.next_doc_id = self.next_doc_id.max(document.doc_id.as_u64() + 1);
        self.documents.insert(document.doc_id, document);
        Ok(())
    }

    /// Applies one concrete lifecycle event.
    pub fn apply_event(&mut self, event: CorpusEvent) -> Result<()> {
        match event {
            CorpusEvent::Add(document) => self.insert(document),
            CorpusEvent::Delete(id) => {
                self.documents
                    .remove(&id)
                    .map(|_| ())
                    .ok_or(Error::UnknownDocument(id))
            }
            CorpusEvent::Copy { doc, new_owner } => {
                if !self.users.contains(&new_owner) {
                    return Err(Error::UnknownUser(new_owner));
                }
                let original = self
                    .documents
                    .get(&doc)
                    .ok_or(Error::UnknownDocument(doc))?;
                let copy = Document {
                    doc_id: DocId::new(self.next_doc_id),
                    owner: new_owner,
                    keywords: original.keywords.clone(),
                    relevance: original.relevance.clone(),
                    copied_from: Some(doc),
                };
                self.next_doc_id += 1;
                self.documents.insert(copy.doc_id, copy);
                Ok(())
            }
            CorpusEvent::RelocateDirect { doc, new_owner } => {
                if !self.users.contains(&new_owner) {
                    return Err(Error::UnknownUser(new_owner));
                }
                let document = self
                    .documents
                    .get_mut(&doc)
                    .ok_or(Error::UnknownDocument(doc))?;
                document.owner = new_owner;
                Ok(())
            }
            CorpusEvent::RelocateIndirect { doc, .. } => Err(Error::UnexpandedEvent(doc)),
        }
    }

    /// All documents owned by `owner` whose keyword set contains `keyword`,
    /// in ascending id order. Possibly empty.
    pub fn matching_docs(&self, owner: UserId, keyword: &Keyword) -> Result<Vec<&Document>> {
        if !self.users.contains(&owner) {
            return Err(Error::UnknownUser(owner));
        }
        Ok(self
            .documents
            .values()
            .filter(|d| d.owner == owner && d.has_keyword(keyword))
            .collect())
    }

    /// The store a perfectly informed user would hold: for every key
    /// (observer, owner, keyword) the maximum ground-truth relevance to the
    /// observer over the owner's matching documents, and 0 where the owner
    /// holds nothing on the keyword (the returned store defaults to 0).
    pub fn ideal_metaknowledge(&self) -> MetaknowledgeStore {
        let mut store = MetaknowledgeStore::new(CertaintyFactor::ZERO);
        for document in self.documents.values() {
            for keyword in &document.keywords {
                for &observer in &self.users {
                    if observer == document.owner {
                        continue;
                    }
                    let relevance = document
                        .relevance
                        .get(&observer)
                        .copied()
                        .unwrap_or_default();
                    let key = MetaKey::new(observer, document.owner, keyword.clone())
                        .expect("observer != owner");
                    if relevance > store.get_cf(&key).value() {
                        store.insert(key, CertaintyFactor::new(relevance).expect("validated"));
                    }
                }
            }
        }
        store
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kw(s: &str) -> Keyword {
        Keyword::new(s).unwrap()
    }

    fn user(id: u32) -> UserId {
        UserId::new(id)
    }

    fn doc(id: u64, owner: u32, keywords: &[&str], relevance: &[(u32, f64)]) -> Document {
        Document::new(
            DocId::new(id),
            user(owner),
            keywords.iter().map(|s| kw(s)).collect(),
            relevance.iter().map(|&(u, v)| (user(u), v)).collect(),
        )
        .unwrap()
    }

    fn two_user_corpus() -> Corpus {
        let mut corpus = Corpus::new(
            [user(0), user(1)].into_iter().collect(),
            [kw("a"), kw("b")].into_iter().collect(),
        );
        corpus
            .insert(doc(0, 0, &["a"], &[(0, 0.9), (1, 0.4)]))
            .unwrap();
        corpus
            .insert(doc(1, 0, &["a", "b"], &[(0, 0.2), (1, 0.8)]))
            .unwrap();
        corpus
            .insert(doc(2, 1, &["b"], &[(0, 0.6), (1, 0.1)]))
            .unwrap();
        corpus
    }

    #[test]
    fn insert_enforces_invariants() {
        let mut corpus = two_user_corpus();
        assert!(matches!(
            corpus.insert(doc(0, 0, &["a"], &[(0, 0.1), (1, 0.1)])),
            Err(Error::DuplicateDocument(_))
        ));
        assert!(matches!(
            corpus.insert(doc(9, 7, &["a"], &[(0, 0.1), (1, 0.1)])),
            Err(Error::UnknownUser(_))
        ));
        assert!(matches!(
            corpus.insert(doc(9, 0, &["zzz"], &[(0, 0.1), (1, 0.1)])),
            Err(Error::UnknownKeyword(_))
        ));
        assert!(matches!(
            corpus.insert(doc(9, 0, &["a"], &[(0, 0.1)])),
            Err(Error::MissingRelevance { .. })
        ));
    }

    #[test]
    fn delete_removes_from_matches() {
        let mut corpus = two_user_corpus();
        corpus.apply_event(CorpusEvent::Delete(DocId::new(0))).unwrap();
        let matches = corpus.matching_docs(user(0), &kw("a")).unwrap();
        assert_eq!(matches.len(), 1);
        assert_eq!(matches[0].doc_id(), DocId::new(1));
        assert!(matches!(
            corpus.apply_event(CorpusEvent::Delete(DocId::new(0))),
            Err(Error::UnknownDocument(_))
        ));
    }

    #[test]
    fn copy_duplicates_under_new_owner() {
        let mut corpus = two_user_corpus();
        corpus
            .apply_event(CorpusEvent::Copy {
                doc: DocId::new(0),
                new_owner: user(1),
            })
            .unwrap();
        assert_eq!(corpus.len(), 4);

        let original = corpus.document(DocId::new(0)).unwrap();
        let copy = corpus
            .documents()
            .find(|d| d.copied_from() == Some(DocId::new(0)))
            .unwrap();
        assert_eq!(copy.owner(), user(1));
        assert_ne!(copy.doc_id(), original.doc_id());
        assert_eq!(copy.keywords(), original.keywords());
        assert_eq!(
            copy.relevance_to(user(1)).unwrap(),
            original.relevance_to(user(1)).unwrap()
        );
        assert!(corpus
            .matching_docs(user(1), &kw("a"))
            .unwrap()
            .iter()
            .any(|d| d.doc_id() == copy.doc_id()));
    }

    #[test]
    fn relocate_direct_moves_in_place() {
        let mut corpus = two_user_corpus();
        corpus
            .apply_event(CorpusEvent::RelocateDirect {
                doc: DocId::new(0),
                new_owner: user(1),
            })
            .unwrap();
        assert_eq!(corpus.len(), 3);
        assert_eq!(corpus.document(DocId::new(0)).unwrap().owner(), user(1));
        assert!(corpus.matching_docs(user(0), &kw("a")).unwrap().len() == 1);
    }

    #[test]
    fn relocate_direct_equals_copy_plus_delete() {
        let direct = {
            let mut c = two_user_corpus();
            c.apply_event(CorpusEvent::RelocateDirect {
                doc: DocId::new(0),
                new_owner: user(1),
            })
            .unwrap();
            c
        };
        let indirect = {
            let mut c = two_user_corpus();
            c.apply_event(CorpusEvent::Copy {
                doc: DocId::new(0),
                new_owner: user(1),
            })
            .unwrap();
            c.apply_event(CorpusEvent::Delete(DocId::new(0))).unwrap();
            c
        };
        // same keyword/relevance multiset per owner, ids aside
        for owner in [user(0), user(1)] {
            let profile = |c: &Corpus| {
                let mut v: Vec<_> = c
                    .documents()
                    .filter(|d| d.owner() == owner)
                    .map(|d| (d.keywords().clone(), d.relevance_to(user(0)).unwrap()))
                    .collect();
                v.sort_by(|a, b| a.partial_cmp(b).unwrap());
                v
            };
            assert_eq!(profile(&direct), profile(&indirect));
        }
    }

    #[test]
    fn unexpanded_indirect_is_rejected() {
        let mut corpus = two_user_corpus();
        assert!(matches!(
            corpus.apply_event(CorpusEvent::RelocateIndirect {
                doc: DocId::new(0),
                new_owner: user(1),
                delete_delay: 5,
            }),
            Err(Error::UnexpandedEvent(_))
        ));
    }

    #[test]
    fn schedule_expansion() {
        let schedule = vec![
            ScheduledEvent {
                fire_at: 10,
                event: CorpusEvent::RelocateIndirect {
                    doc: DocId::new(0),
                    new_owner: user(1),
                    delete_delay: 5,
                },
            },
            ScheduledEvent {
                fire_at: 12,
                event: CorpusEvent::Delete(DocId::new(2)),
            },
        ];
        let expanded = expand_schedule(&schedule);
        assert_eq!(expanded.len(), 3);
        assert_eq!(expanded[0].fire_at, 10);
        assert!(matches!(expanded[0].event, CorpusEvent::Copy { .. }));
        assert_eq!(expanded[1].fire_at, 12);
        assert!(matches!(expanded[1].event, CorpusEvent::Delete(d) if d == DocId::new(2)));
        assert_eq!(expanded[2].fire_at, 15);
        assert!(matches!(expanded[2].event, CorpusEvent::Delete(d) if d == DocId::new(0)));
    }

    #[test]
    fn matching_docs_filters() {
        let corpus = two_user_corpus();
        assert!(corpus.matching_docs(user(1), &kw("a")).unwrap().is_empty());
        assert_eq!(corpus.matching_docs(user(0), &kw("a")).unwrap().len(), 2);
        assert!(matches!(
            corpus.matching_docs(user(9), &kw("a")),
            Err(Error::UnknownUser(_))
        ));
    }

    #[test]
    fn ideal_metaknowledge_takes_maxima() {
        let corpus = two_user_corpus();
        let ideal = corpus.ideal_metaknowledge();

        let key = |o: u32, w: u32, k: &str| MetaKey::new(user(o), user(w), kw(k)).unwrap();
        // owner 0 on "a": docs with relevance {0.4, 0.8} to user 1
        assert_eq!(ideal.get_cf(&key(1, 0, "a")).value(), 0.8);
        // owner 1 has nothing on "a"
        assert_eq!(ideal.get_cf(&key(0, 1, "a")).value(), 0.0);
        assert_eq!(ideal.get_cf(&key(0, 1, "b")).value(), 0.6);

        // pure function of the corpus
        assert_eq!(ideal, corpus.ideal_metaknowledge());
    }

    #[test]
    fn ideal_tracks_relocation() {
        let mut corpus = Corpus::new(
            [user(0), user(1), user(2)].into_iter().collect(),
            [kw("a")].into_iter().collect(),
        );
        corpus
            .insert(doc(0, 1, &["a"], &[(0, 0.7), (1, 0.5), (2, 0.3)]))
            .unwrap();
        let key = |o: u32, w: u32| MetaKey::new(user(o), user(w), kw("a")).unwrap();

        let before = corpus.ideal_metaknowledge();
        assert_eq!(before.get_cf(&key(0, 1)).value(), 0.7);
        assert_eq!(before.get_cf(&key(0, 2)).value(), 0.0);

        // move user 1's only "a" document to user 2
        corpus
            .apply_event(CorpusEvent::RelocateDirect {
                doc: DocId::new(0),
                new_owner: user(2),
            })
            .unwrap();
        let after = corpus.ideal_metaknowledge();
        assert_eq!(after.get_cf(&key(0, 1)).value(), 0.0);
        assert_eq!(after.get_cf(&key(0, 2)).value(), 0.7);
    }
}
