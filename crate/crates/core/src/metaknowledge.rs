//! Certainty factors keyed by (observer, owner, keyword).
//!
//! The store answers lookups with a configurable default for unseen keys,
//! applies evidence through the calculus, produces search orderings, and
//! measures how far one store sits from another over a key domain.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;

use crate::calculus::{CertaintyFactor, Evidence, PolicyParams};
use crate::error::{Error, Result};
use crate::numfmt;

/// One participant in the query environment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UserId(u32);

impl UserId {
    pub fn new(id: u32) -> Self {
        UserId(id)
    }

    pub fn as_u32(self) -> u32 {
        self.0
    }
}

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Lower-cased nonempty search token.
///
/// Normalization is idempotent; two keywords are equal exactly when their
/// normalized tokens are. Whitespace, commas, quotes and control characters
/// are rejected so snapshot CSV rows stay single-token parseable.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Keyword(String);

impl Keyword {
    pub fn new(token: &str) -> Result<Self> {
        let normalized = token.to_lowercase();
        if normalized.is_empty() {
            return Err(Error::EmptyKeyword);
        }
        if let Some(ch) = normalized
            .chars()
            .find(|c| c.is_whitespace() || c.is_control() || *c == ',' || *c == '"')
        {
            return Err(Error::KeywordChar {
                token: token.to_string(),
                ch,
            });
        }
        Ok(Keyword(normalized))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Keyword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Belief coordinate: `observer`'s belief about `owner`'s collection on
/// `keyword`. Self-beliefs are not representable.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MetaKey {
    observer: UserId,
    owner: UserId,
    keyword: Keyword,
}

impl MetaKey {
    pub fn new(observer: UserId, owner: UserId, keyword: Keyword) -> Result<Self> {
        if observer == owner {
            return Err(Error::SelfBelief(observer));
        }
        Ok(MetaKey {
            observer,
            owner,
            keyword,
        })
    }

    pub fn observer(&self) -> UserId {
        self.observer
    }

    pub fn owner(&self) -> UserId {
        self.owner
    }

    pub fn keyword(&self) -> &Keyword {
        &self.keyword
    }
}

/// Associative table of certainty factors with a default for unseen keys.
#[derive(Clone, Debug, PartialEq)]
pub struct MetaknowledgeStore {
    entries: BTreeMap<MetaKey, CertaintyFactor>,
    default_cf: CertaintyFactor,
}

impl Default for MetaknowledgeStore {
    /// Empty store with the maximal-ignorance default of 0.5.
    fn default() -> Self {
        MetaknowledgeStore::new(CertaintyFactor::HALF)
    }
}

impl MetaknowledgeStore {
    pub fn new(default_cf: CertaintyFactor) -> Self {
        MetaknowledgeStore {
            entries: BTreeMap::new(),
            default_cf,
        }
    }

    pub fn default_cf(&self) -> CertaintyFactor {
        self.default_cf
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Iterates materialized entries in key order.
    pub fn iter(&self) -> impl Iterator<Item = (&MetaKey, CertaintyFactor)> {
        self.entries.iter().map(|(k, v)| (k, *v))
    }

    /// Stored value if present, else the default. Never creates an entry.
    pub fn get_cf(&self, key: &MetaKey) -> CertaintyFactor {
        self.entries.get(key).copied().unwrap_or(self.default_cf)
    }

    /// Sets a value directly, materializing the entry.
    pub fn insert(&mut self, key: MetaKey, cf: CertaintyFactor) {
        self.entries.insert(key, cf);
    }

    /// Revises the value under `key` with one piece of evidence and stores
    /// the result. The entry is materialized even when the revision is a
    /// no-op.
    pub fn apply_evidence(
        &mut self,
        key: &MetaKey,
        evidence: Evidence,
        policy: PolicyParams,
    ) -> CertaintyFactor {
        let revised = policy.revise(self.get_cf(key), evidence);
        self.entries.insert(key.clone(), revised);
        revised
    }

    /// Orders candidate owners for a search: certainty factor descending,
    /// ties broken by ascending user id. The output is a canonical
    /// permutation of `owners` regardless of their input order.
    pub fn order_owners(
        &self,
        observer: UserId,
        keyword: &Keyword,
        owners: &[UserId],
    ) -> Result<Vec<UserId>> {
        let mut seen = BTreeSet::new();
        for &owner in owners {
            if owner == observer {
                return Err(Error::ObserverInCandidates(observer));
            }
            if !seen.insert(owner) {
                return Err(Error::DuplicateOwner(owner));
            }
        }

        let mut ranked: Vec<(f64, UserId)> = owners
            .iter()
            .map(|&owner| {
                let key = MetaKey::new(observer, owner, keyword.clone())?;
                Ok((self.get_cf(&key).value(), owner))
            })
            .collect::<Result<_>>()?;
        ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        Ok(ranked.into_iter().map(|(_, owner)| owner).collect())
    }

    /// Serializes materialized entries as `observer,owner,keyword,cf` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "observer,owner,keyword,cf")?;
        for (key, cf) in self.iter() {
            writeln!(
                w,
                "{},{},{},{}",
                key.observer(),
                key.owner(),
                key.keyword(),
                numfmt::sig12(cf.value())
            )?;
        }
        Ok(())
    }

    /// Parses a snapshot produced by [`write_csv`](Self::write_csv).
    pub fn from_csv_str(text: &str, default_cf: CertaintyFactor) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some("observer,owner,keyword,cf") => {}
            other => {
                return Err(Error::Parse(format!(
                    "bad store header: {:?}",
                    other.unwrap_or("")
                )))
            }
        }
        let mut store = MetaknowledgeStore::new(default_cf);
        for (n, line) in lines.enumerate() {
            let mut parts = line.split(',');
            let mut field = || {
                parts
                    .next()
                    .ok_or_else(|| Error::Parse(format!("store row {} is short", n + 2)))
            };
            let observer: u32 = field()?
                .parse()
                .map_err(|e| Error::Parse(format!("store row {}: {e}", n + 2)))?;
            let owner: u32 = field()?
                .parse()
                .map_err(|e| Error::Parse(format!("store row {}: {e}", n + 2)))?;
            let keyword = Keyword::new(field()?)?;
            let cf: f64 = field()?
                .parse()
                .map_err(|e| Error::Parse(format!("store row {}: {e}", n + 2)))?;
            let key = MetaKey::new(UserId::new(observer), UserId::new(owner), keyword)?;
            store.insert(key, CertaintyFactor::new(cf)?);
        }
        Ok(store)
    }
}

/// Mean absolute difference between two stores over a key domain, with
/// absent keys read at each store's own default. Zero exactly when the
/// stores agree on every domain key.
pub fn distance(
    actual: &MetaknowledgeStore,
    ideal: &MetaknowledgeStore,
    domain: &BTreeSet<MetaKey>,
) -> Result<f64> {
    if domain.is_empty() {
        return Err(Error::EmptyDomain);
    }
    let total: f64 = domain
        .iter()
        .map(|key| (actual.get_cf(key).value() - ideal.get_cf(key).value()).abs())
        .sum();
    Ok(total / domain.len() as f64)
}
