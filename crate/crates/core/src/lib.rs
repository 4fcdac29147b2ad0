//! Adaptive ordering of searches across distributed document collections.
//!
//! Each user holds bounded certainty factors describing how likely a peer's
//! collection is to satisfy a keyword query. Query outcomes feed back
//! through a constrained revision calculus, so orderings improve with use
//! and recover when documents move. The crate bundles the calculus, the
//! metaknowledge store, corpus lifecycle dynamics, a query engine, and a
//! seeded deterministic simulator that exports learning curves.

pub mod calculus;
pub mod corpus;
pub mod curve;
pub mod engine;
pub mod error;
pub mod metaknowledge;
pub mod rng;
pub mod scenario;
pub mod simulator;

mod numfmt;

pub use calculus::{
    validate_pair, CertaintyFactor, Constraint, Evidence, FnPair, PolicyParams, UpdatePair,
    ValidationReport, Violation,
};
pub use corpus::{expand_schedule, Corpus, CorpusEvent, DocId, Document, ScheduledEvent};
pub use curve::{CurveRow, LearningCurve};
pub use engine::{execute_query, EngineConfig, EvidenceRecord, Query, QueryOutcome};
pub use error::{Error, Result};
pub use metaknowledge::{distance, Keyword, MetaKey, MetaknowledgeStore, UserId};
pub use scenario::{CorpusInit, GeneratorSpec, Scenario, Workload};
pub use simulator::{run, RunOutput, RunSummary};
