//! Error type shared by every module in the crate.

use thiserror::Error;

use crate::corpus::DocId;
use crate::metaknowledge::UserId;

/// Everything that can go wrong while building or running a scenario.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{name} must lie in [0, 1], got {value}")]
    OutOfRange { name: &'static str, value: f64 },

    #[error("constraint grid needs at least 2 points, got {0}")]
    GridTooSmall(usize),

    #[error("keyword token must be nonempty")]
    EmptyKeyword,

    #[error("keyword token {token:?} contains forbidden character {ch:?}")]
    KeywordChar { token: String, ch: char },

    #[error("observer and owner must differ, both are user {0}")]
    SelfBelief(UserId),

    #[error("duplicate owner {0} in candidate list")]
    DuplicateOwner(UserId),

    #[error("observer {0} may not appear in its own candidate list")]
    ObserverInCandidates(UserId),

    #[error("distance domain is empty")]
    EmptyDomain,

    #[error("unknown user {0}")]
    UnknownUser(UserId),

    #[error("unknown document {0}")]
    UnknownDocument(DocId),

    #[error("unknown keyword {0:?}")]
    UnknownKeyword(String),

    #[error("duplicate document id {0}")]
    DuplicateDocument(DocId),

    #[error("document {0} has an empty keyword set")]
    NoKeywords(DocId),

    #[error("document {doc} has no relevance value for user {user}")]
    MissingRelevance { doc: DocId, user: UserId },

    #[error("indirect relocation of document {0} must be expanded before application")]
    UnexpandedEvent(DocId),

    #[error("requester rating evidence requires at least one returned document")]
    EmptyResult,

    #[error("scenario field `{field}`: {message}")]
    Scenario { field: String, message: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Shorthand for scenario validation failures that name the offending field.
    pub fn scenario(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Scenario {
            field: field.into(),
            message: message.into(),
        }
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
