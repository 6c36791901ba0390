//! One store contract over a remote SPARQL 1.1 endpoint or the embedded
//! in-memory quad store.

mod eval;
mod expr;
pub mod endpoint;
pub mod json;
mod memory;
mod remote;

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Duration;

use crate::delta::DeltaError;
use crate::rdf::{NamedNode, Quad, QuadSet, Subject, Term};

pub use memory::MemoryStore;
pub use remote::RemoteStore;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SparqlError {
    #[error("malformed query: {0}")]
    Syntax(String),
    #[error("unsupported query feature: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Update(#[from] DeltaError),
    #[error("endpoint unreachable: {0}")]
    Unreachable(String),
    #[error("endpoint timed out after {0:?}")]
    Timeout(Duration),
    #[error("endpoint error {status}: {body}")]
    Endpoint { status: u16, body: String },
    #[error("malformed results document: {0}")]
    Results(String),
    #[error("store failure: {0}")]
    Failure(String),
}

/// Variables in projection order, plus one binding map per solution.
/// Unbound variables are absent from the row.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SelectResult {
    pub variables: Vec<String>,
    pub rows: Vec<BTreeMap<String, Term>>,
}

impl SelectResult {
    /// The values bound to `variable`, in row order.
    pub fn column<'a>(&'a self, variable: &'a str) -> impl Iterator<Item = &'a Term> + 'a {
        self.rows.iter().filter_map(move |r| r.get(variable))
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }
}

pub trait SparqlStore: Send + Sync {
    fn select(&self, query: &str) -> Result<SelectResult, SparqlError>;
    /// Accepts only `INSERT DATA` / `DELETE DATA` operations.
    fn update(&self, update_text: &str) -> Result<(), SparqlError>;
    fn load_quads(&self, quads: &QuadSet) -> Result<(), SparqlError>;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StoreConfig {
    Memory,
    Remote {
        query_endpoint: String,
        update_endpoint: String,
        timeout: Duration,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StoreKind {
    Memory,
    Remote,
}

/// Shareable handle to a store; cloning shares the same backend.
#[derive(Clone)]
pub struct StoreHandle {
    kind: StoreKind,
    query_endpoint: Option<String>,
    update_endpoint: Option<String>,
    timeout: Duration,
    store: Arc<dyn SparqlStore>,
}

impl std::fmt::Debug for StoreHandle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StoreHandle")
            .field("kind", &self.kind)
            .field("query_endpoint", &self.query_endpoint)
            .field("update_endpoint", &self.update_endpoint)
            .finish()
    }
}

impl StoreHandle {
    pub fn open(config: &StoreConfig) -> Result<Self, SparqlError> {
        match config {
            StoreConfig::Memory => Ok(Self::memory()),
            StoreConfig::Remote {
                query_endpoint,
                update_endpoint,
                timeout,
            } => Self::remote(query_endpoint, update_endpoint, *timeout),
        }
    }

    pub fn memory() -> Self {
        Self::from_memory(Arc::new(MemoryStore::new()))
    }

    pub fn from_memory(store: Arc<MemoryStore>) -> Self {
        Self {
            kind: StoreKind::Memory,
            query_endpoint: None,
            update_endpoint: None,
            timeout: Duration::ZERO,
            store,
        }
    }

    pub fn remote(query_endpoint: &str, update_endpoint: &str, timeout: Duration) -> Result<Self, SparqlError> {
        let store = RemoteStore::new(query_endpoint, update_endpoint, timeout)?;
        Ok(Self {
            kind: StoreKind::Remote,
            query_endpoint: Some(query_endpoint.to_owned()),
            update_endpoint: Some(update_endpoint.to_owned()),
            timeout,
            store: Arc::new(store),
        })
    }

    /// Wraps any store implementation, e.g. a fault-injecting test double.
    pub fn custom(store: Arc<dyn SparqlStore>) -> Self {
        Self {
            kind: StoreKind::Memory,
            query_endpoint: None,
            update_endpoint: None,
            timeout: Duration::ZERO,
            store,
        }
    }

    pub fn kind(&self) -> StoreKind {
        self.kind
    }

    pub fn query_endpoint(&self) -> Option<&str> {
        self.query_endpoint.as_deref()
    }

    pub fn update_endpoint(&self) -> Option<&str> {
        self.update_endpoint.as_deref()
    }

    pub fn timeout(&self) -> Duration {
        self.timeout
    }

    /// True when both handles talk to the same backend.
    pub fn same_backend(&self, other: &StoreHandle) -> bool {
        Arc::ptr_eq(&self.store, &other.store)
            || (self.kind == StoreKind::Remote && self.update_endpoint == other.update_endpoint)
    }

    pub fn select(&self, query: &str) -> Result<SelectResult, SparqlError> {
        self.store.select(query)
    }

    pub fn update(&self, update_text: &str) -> Result<(), SparqlError> {
        if update_text.trim().is_empty() {
            return Ok(());
        }
        self.store.update(update_text)
    }

    pub fn load_quads(&self, quads: &QuadSet) -> Result<(), SparqlError> {
        if quads.is_empty() {
            return Ok(());
        }
        self.store.load_quads(quads)
    }
}

pub fn select(store: &StoreHandle, query: &str) -> Result<SelectResult, SparqlError> {
    store.select(query)
}

pub fn update(store: &StoreHandle, update_text: &str) -> Result<(), SparqlError> {
    store.update(update_text)
}

pub fn load_quads(store: &StoreHandle, quads: &QuadSet) -> Result<(), SparqlError> {
    store.load_quads(quads)
}

/// Escapes a string for use inside a double-quoted SPARQL literal.
pub fn escape_literal(value: &str) -> String {
    let mut out = String::with_capacity(value.len() + 2);
    for c in value.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out
}

pub(crate) fn parse_query(query: &str) -> Result<spargebra::Query, SparqlError> {
    spargebra::SparqlParser::new()
        .parse_query(query)
        .map_err(|e| SparqlError::Syntax(e.to_string()))
}

/// Quads whose subject is `entity`, in the default graph or any named graph.
pub fn describe(store: &StoreHandle, entity: &NamedNode) -> Result<QuadSet, SparqlError> {
    let query = format!("SELECT ?p ?o ?g WHERE {{ {{ {entity} ?p ?o }} UNION {{ GRAPH ?g {{ {entity} ?p ?o }} }} }}");
    let subject = Subject::NamedNode(entity.clone());
    rows_to_quads(&store.select(&query)?, |_| Some(subject.clone()))
}

/// Every quad of the named graph `graph`.
pub fn graph_quads(store: &StoreHandle, graph: &NamedNode) -> Result<QuadSet, SparqlError> {
    let query = format!("SELECT ?s ?p ?o WHERE {{ GRAPH {graph} {{ ?s ?p ?o }} }}");
    let mut quads = rows_to_quads(&store.select(&query)?, |row| {
        row.get("s").cloned().and_then(|s| Subject::try_from(s).ok())
    })?;
    quads = quads
        .into_iter()
        .map(|mut q| {
            q.graph = Some(graph.clone());
            q
        })
        .collect();
    Ok(quads)
}

fn rows_to_quads(
    result: &SelectResult,
    subject: impl Fn(&BTreeMap<String, Term>) -> Option<Subject>,
) -> Result<QuadSet, SparqlError> {
    let mut out = QuadSet::new();
    for row in &result.rows {
        let bad = || SparqlError::Results(format!("not a quad: {row:?}"));
        let s = subject(row).ok_or_else(bad)?;
        let p = row.get("p").and_then(Term::as_named_node).cloned().ok_or_else(bad)?;
        let o = row.get("o").cloned().ok_or_else(bad)?;
        let g = match row.get("g") {
            Some(g) => Some(g.as_named_node().cloned().ok_or_else(bad)?),
            None => None,
        };
        out.insert(Quad::new(s, p, o, g));
    }
    Ok(out)
}
