//! The curation service: catalog, entity editing with validation and
//! snapshotting, disambiguation search, history, restore and vault.

mod catalog;
mod entity;
mod history;
mod locks;
mod search;
mod write;

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use chrono::Utc;

use crate::display::{self, DisplayConfig, DisplayRule};
use crate::provenance::{ProvError, Timestamp};
use crate::rdf::vocab::rdf;
use crate::rdf::{NamedNode, QuadSet, Term};
use crate::shacl::{Shapes, ValidationReport};
use crate::sparql::{self, SparqlError, StoreHandle};
use crate::time_travel::{self, TimeTravelError};

pub use catalog::{CatalogPage, Category, SortDir, PER_PAGE_DEFAULT, PER_PAGE_OPTIONS};
pub use entity::{CreateRequest, EditRequest, EntityDetail, FieldValue, FieldView, NewEntity, RenderedValue};
pub use history::{Change, SnapshotSummary};
pub use locks::{EntityLocks, LockGuard};
pub use search::{Suggestion, MAX_SUGGESTIONS};

pub(crate) mod ser {
    use serde::Serializer;

    use crate::provenance::{format_timestamp, Timestamp};
    use crate::rdf::Term;
    use crate::sparql::json::term_to_json;

    pub fn term<S: Serializer>(t: &Term, s: S) -> Result<S::Ok, S::Error> {
        serde::Serialize::serialize(&term_to_json(t), s)
    }

    pub fn terms<S: Serializer>(ts: &[Term], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(ts.iter().map(term_to_json))
    }

    pub fn timestamp<S: Serializer>(t: &Timestamp, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_timestamp(t))
    }

    pub fn opt_timestamp<S: Serializer>(t: &Option<Timestamp>, s: S) -> Result<S::Ok, S::Error> {
        match t {
            Some(t) => s.serialize_str(&format_timestamp(t)),
            None => s.serialize_none(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ServiceError {
    #[error("entity {0} not found")]
    NotFound(NamedNode),
    #[error("entity {0} is deleted; see the vault")]
    Deleted(NamedNode),
    #[error("stale head for {entity}: expected {expected}, current {actual}")]
    Stale { entity: NamedNode, expected: u64, actual: u64 },
    #[error("validation failed with {} violation(s)", .0.violations.len())]
    Validation(ValidationReport),
    #[error("class {0} cannot be created")]
    NotCreatable(NamedNode),
    #[error("unknown category {0}")]
    UnknownCategory(NamedNode),
    #[error("per_page must be one of 20, 50, 100; got {0}")]
    InvalidPerPage(u32),
    #[error("page numbers start at 1")]
    InvalidPage,
    #[error("{0} is not a sort key of this category")]
    InvalidSort(NamedNode),
    #[error("edit changes nothing")]
    EmptyEdit,
    #[error("snapshot {k} out of range; restorable snapshots are 1..{n}")]
    OutOfRange { k: u64, n: u64 },
    #[error("missing or unknown credentials")]
    Unauthorized,
    #[error("conflicting writes: {0}")]
    Conflict(String),
    #[error(transparent)]
    Store(#[from] SparqlError),
    #[error(transparent)]
    Prov(#[from] ProvError),
    #[error(transparent)]
    History(TimeTravelError),
}

impl From<TimeTravelError> for ServiceError {
    fn from(e: TimeTravelError) -> Self {
        match e {
            TimeTravelError::OutOfRange { k, n } => ServiceError::OutOfRange { k, n },
            TimeTravelError::Store(e) => ServiceError::Store(e),
            TimeTravelError::Prov(e) => ServiceError::Prov(e),
            e => ServiceError::History(e),
        }
    }
}

pub trait Clock: Send + Sync {
    fn now(&self) -> Timestamp;
}

pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> Timestamp {
        Utc::now()
    }
}

/// A clock that only moves when told to.
pub struct ManualClock(Mutex<Timestamp>);

impl ManualClock {
    pub fn new(start: Timestamp) -> Self {
        Self(Mutex::new(start))
    }

    pub fn set(&self, t: Timestamp) {
        *self.0.lock().expect("clock poisoned") = t;
    }

    pub fn advance(&self, by: chrono::Duration) {
        *self.0.lock().expect("clock poisoned") += by;
    }
}

impl Clock for ManualClock {
    fn now(&self) -> Timestamp {
        *self.0.lock().expect("clock poisoned")
    }
}

/// Maps request credentials to the agent IRI that edits are attributed to.
pub trait AgentResolver: Send + Sync {
    fn resolve(&self, bearer: Option<&str>) -> Option<NamedNode>;
}

/// One configured bearer token for one agent. Without a token every request
/// is attributed to the agent.
pub struct StaticToken {
    pub token: Option<String>,
    pub agent: NamedNode,
}

impl AgentResolver for StaticToken {
    fn resolve(&self, bearer: Option<&str>) -> Option<NamedNode> {
        match &self.token {
            None => Some(self.agent.clone()),
            Some(t) => (bearer == Some(t.as_str())).then(|| self.agent.clone()),
        }
    }
}

pub struct ServiceConfig {
    /// Minted entity IRIs are `{base_iri}/{class local name}/{n}`.
    pub base_iri: String,
    pub display: DisplayConfig,
    pub shapes: Shapes,
    /// `(prefix, namespace)` pairs for compact IRIs in suggestions.
    pub prefixes: Vec<(String, String)>,
    /// Graph for quads of newly created entities; `None` is the default graph.
    pub data_graph: Option<NamedNode>,
}

impl ServiceConfig {
    pub fn new(base_iri: &str) -> Self {
        Self {
            base_iri: base_iri.trim_end_matches('/').to_owned(),
            display: DisplayConfig::default(),
            shapes: Shapes::default(),
            prefixes: default_prefixes(),
            data_graph: None,
        }
    }
}

pub fn default_prefixes() -> Vec<(String, String)> {
    [
        ("omid", "https://w3id.org/oc/meta/"),
        ("orcid", "https://orcid.org/"),
        ("doi", "https://doi.org/"),
        ("fabio", "http://purl.org/spar/fabio/"),
        ("dcterms", "http://purl.org/dc/terms/"),
        ("foaf", "http://xmlns.com/foaf/0.1/"),
    ]
    .iter()
    .map(|(p, n)| (p.to_string(), n.to_string()))
    .collect()
}

pub struct Service {
    pub(crate) data: StoreHandle,
    pub(crate) prov: StoreHandle,
    pub(crate) config: ServiceConfig,
    pub(crate) clock: Arc<dyn Clock>,
    pub(crate) locks: EntityLocks,
    /// Highest number handed out per counter since startup.
    pub(crate) mint: Mutex<BTreeMap<NamedNode, u64>>,
}

impl Service {
    /// `data` and `prov` may be the same store.
    pub fn new(data: StoreHandle, prov: StoreHandle, config: ServiceConfig) -> Self {
        Self {
            data,
            prov,
            config,
            clock: Arc::new(SystemClock),
            locks: EntityLocks::new(),
            mint: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn with_clock(mut self, clock: Arc<dyn Clock>) -> Self {
        self.clock = clock;
        self
    }

    pub fn data_store(&self) -> &StoreHandle {
        &self.data
    }

    pub fn prov_store(&self) -> &StoreHandle {
        &self.prov
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub(crate) fn now(&self) -> Timestamp {
        self.clock.now()
    }

    /// Live quads about `entity`.
    pub fn entity_quads(&self, entity: &NamedNode) -> Result<QuadSet, ServiceError> {
        Ok(sparql::describe(&self.data, entity)?)
    }

    pub(crate) fn types_in(quads: &QuadSet) -> Vec<NamedNode> {
        quads
            .iter()
            .filter(|q| q.predicate.as_str() == rdf::TYPE)
            .filter_map(|q| q.object.as_named_node().cloned())
            .collect()
    }

    pub(crate) fn types_of(&self, entity: &NamedNode) -> Result<Vec<NamedNode>, ServiceError> {
        let q = format!("SELECT DISTINCT ?t WHERE {{ {{ {entity} a ?t }} UNION {{ GRAPH ?g {{ {entity} a ?t }} }} }} ORDER BY ?t");
        Ok(self.data.select(&q)?.column("t").filter_map(Term::as_named_node).cloned().collect())
    }

    pub(crate) fn rule_for(&self, types: &[NamedNode]) -> Option<&DisplayRule> {
        self.config.display.resolve(types)
    }

    /// Human-readable label of a live entity; its IRI when no rule applies.
    pub fn display_of(&self, entity: &NamedNode) -> Result<String, ServiceError> {
        let types = self.types_of(entity)?;
        Ok(self.display_with_types(entity, &types))
    }

    pub(crate) fn display_with_types(&self, entity: &NamedNode, types: &[NamedNode]) -> String {
        match self.rule_for(types) {
            Some(rule) => display::render_uri_display(entity, rule, &self.data),
            None => entity.as_str().to_owned(),
        }
    }

    /// `prefix:local` for the longest matching namespace, else the IRI.
    pub fn compact(&self, iri: &NamedNode) -> String {
        self.config
            .prefixes
            .iter()
            .filter(|(_, ns)| iri.as_str().starts_with(ns.as_str()) && iri.as_str().len() > ns.len())
            .max_by_key(|(_, ns)| ns.len())
            .map(|(p, ns)| format!("{p}:{}", &iri.as_str()[ns.len()..]))
            .unwrap_or_else(|| iri.as_str().to_owned())
    }

    /// Deleted entities, most recent first.
    pub fn list_vault(&self) -> Result<Vec<time_travel::VaultEntry>, ServiceError> {
        Ok(time_travel::list_vault(&self.prov)?)
    }

    /// True when the entity's rule hides it from the catalog, which also
    /// makes it follow its parent on cascading restores.
    pub(crate) fn is_dependent(&self, types: &[NamedNode]) -> bool {
        self.rule_for(types).is_some_and(|r| !r.should_be_displayed)
    }
}
