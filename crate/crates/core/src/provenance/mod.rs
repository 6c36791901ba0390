//! Snapshot chains: one provenance record per entity state.
//!
//! Each edit appends a [`Snapshot`] carrying its [`Delta`]; the previous head
//! is invalidated at the same instant. Chains are persisted as `prov:Entity`
//! resources in the graph `{entity}/prov` (see [`to_prov_quads`]).

mod quads;

use chrono::{DateTime, SecondsFormat, SubsecRound, Utc};

use crate::delta::{Delta, DeltaError};
use crate::rdf::NamedNode;

pub use quads::{chain_quads, from_prov_quads, to_prov_quads, write_delta};

pub type Timestamp = DateTime<Utc>;

/// Description of the creation snapshot given to data that existed before
/// it was first edited here.
pub const IMPORTED: &str = "imported";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProvError {
    #[error("clock regression: {now} is before head timestamp {head}")]
    ClockRegression { head: Timestamp, now: Timestamp },
    #[error("empty delta on a plain edit")]
    EmptyDelta,
    #[error("creation snapshot cannot delete quads")]
    CreationDeletes,
    #[error("entity {0} is deleted")]
    Deleted(NamedNode),
    #[error("entity {0} has no snapshots")]
    Empty(NamedNode),
    #[error("snapshot {0} out of range 1..={1}")]
    OutOfRange(u64, u64),
    #[error("broken chain: {0}")]
    BrokenChain(String),
    #[error("malformed timestamp {0:?}")]
    MalformedTimestamp(String),
    #[error("unparseable update query on {snapshot}: {source}")]
    UpdateQuery { snapshot: NamedNode, source: DeltaError },
    #[error("malformed snapshot {snapshot}: {reason}")]
    Malformed { snapshot: NamedNode, reason: String },
    #[error("chain invariant violated: {0}")]
    Invariant(String),
}

/// One recorded state transition of an entity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot {
    pub id: NamedNode,
    pub entity: NamedNode,
    pub sequence: u64,
    pub generated_at: Timestamp,
    pub invalidated_at: Option<Timestamp>,
    pub agent: NamedNode,
    pub primary_source: Option<NamedNode>,
    pub description: String,
    pub delta: Delta,
    pub derived_from: Option<NamedNode>,
}

impl Snapshot {
    pub fn is_import(&self) -> bool {
        self.sequence == 1 && self.description == IMPORTED
    }

    /// A deletion snapshot is invalidated at the instant it was generated.
    pub fn is_terminal(&self) -> bool {
        self.invalidated_at == Some(self.generated_at)
    }
}

/// Snapshots of one entity ordered by sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProvenanceChain {
    pub entity: NamedNode,
    pub snapshots: Vec<Snapshot>,
}

/// `{entity}/prov/se/{sequence}`
pub fn snapshot_iri(entity: &NamedNode, sequence: u64) -> NamedNode {
    NamedNode::new_unchecked(format!("{}/prov/se/{sequence}", entity.as_str()))
}

/// `{entity}/prov`
pub fn prov_graph(entity: &NamedNode) -> NamedNode {
    NamedNode::new_unchecked(format!("{}/prov", entity.as_str()))
}

/// `xsd:dateTime` lexical form in UTC with milliseconds.
pub fn format_timestamp(t: &Timestamp) -> String {
    t.to_rfc3339_opts(SecondsFormat::Millis, true)
}

pub fn parse_timestamp(text: &str) -> Result<Timestamp, ProvError> {
    DateTime::parse_from_rfc3339(text)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|_| ProvError::MalformedTimestamp(text.to_owned()))
}

impl ProvenanceChain {
    pub fn new(entity: NamedNode) -> Self {
        Self {
            entity,
            snapshots: Vec::new(),
        }
    }

    pub fn len(&self) -> u64 {
        self.snapshots.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn head(&self) -> Option<&Snapshot> {
        self.snapshots.last()
    }

    /// Sequence of the last snapshot, 0 for an empty chain.
    pub fn head_sequence(&self) -> u64 {
        self.len()
    }

    pub fn is_deleted(&self) -> bool {
        self.head().is_some_and(|h| h.invalidated_at.is_some())
    }

    pub fn get(&self, sequence: u64) -> Option<&Snapshot> {
        sequence
            .checked_sub(1)
            .and_then(|i| self.snapshots.get(i as usize))
    }

    /// Latest snapshot generated at or before `at`; 0 when none was.
    pub fn sequence_at(&self, at: &Timestamp) -> u64 {
        self.snapshots
            .iter()
            .take_while(|s| s.generated_at <= *at)
            .last()
            .map_or(0, |s| s.sequence)
    }

    /// Checks every chain and snapshot invariant.
    pub fn check(&self) -> Result<(), ProvError> {
        let n = self.snapshots.len();
        for (i, s) in self.snapshots.iter().enumerate() {
            let fail = |msg: String| Err(ProvError::Invariant(format!("{}: {msg}", s.id)));
            if s.entity != self.entity {
                return fail(format!("belongs to {}", s.entity));
            }
            if s.sequence != i as u64 + 1 {
                return fail(format!("sequence {} at position {}", s.sequence, i + 1));
            }
            match (i, &s.derived_from) {
                (0, None) => {
                    if !s.delta.deletions().is_empty() {
                        return fail("creation snapshot deletes quads".into());
                    }
                }
                (0, Some(_)) => return fail("creation snapshot is derived".into()),
                (_, None) => return fail("missing wasDerivedFrom".into()),
                (_, Some(prev)) => {
                    let before = &self.snapshots[i - 1];
                    if *prev != before.id {
                        return fail(format!("derived from {prev}, expected {}", before.id));
                    }
                    if s.generated_at < before.generated_at {
                        return fail("generated before its predecessor".into());
                    }
                }
            }
            match s.invalidated_at {
                Some(t) if t < s.generated_at => return fail("invalidated before generated".into()),
                None if i + 1 != n => return fail("live snapshot is not the head".into()),
                _ => {}
            }
        }
        Ok(())
    }

    fn append(&self, draft: Draft<'_>, now: Timestamp) -> Result<ProvenanceChain, ProvError> {
        let now = now.trunc_subsecs(3);
        if let Some(head) = self.head() {
            if now < head.generated_at {
                return Err(ProvError::ClockRegression {
                    head: head.generated_at,
                    now,
                });
            }
        } else if !draft.delta.deletions().is_empty() {
            return Err(ProvError::CreationDeletes);
        }
        let mut next = self.clone();
        if let Some(head) = next.snapshots.last_mut() {
            head.invalidated_at.get_or_insert(now);
        }
        let sequence = self.len() + 1;
        next.snapshots.push(Snapshot {
            id: snapshot_iri(&self.entity, sequence),
            entity: self.entity.clone(),
            sequence,
            generated_at: now,
            invalidated_at: draft.terminal.then_some(now),
            agent: draft.agent.clone(),
            primary_source: draft.source.cloned(),
            description: draft.description,
            delta: draft.delta,
            derived_from: self.head().map(|h| h.id.clone()),
        });
        Ok(next)
    }
}

struct Draft<'a> {
    delta: Delta,
    agent: &'a NamedNode,
    source: Option<&'a NamedNode>,
    description: String,
    terminal: bool,
}

/// Appends a creation or edit snapshot.
pub fn record_snapshot(
    chain: &ProvenanceChain,
    delta: Delta,
    agent: &NamedNode,
    source: Option<&NamedNode>,
    description: &str,
    now: Timestamp,
) -> Result<ProvenanceChain, ProvError> {
    if delta.is_empty() {
        return Err(ProvError::EmptyDelta);
    }
    if chain.is_deleted() {
        return Err(ProvError::Deleted(chain.entity.clone()));
    }
    let draft = Draft {
        delta,
        agent,
        source,
        description: description.to_owned(),
        terminal: false,
    };
    chain.append(draft, now)
}

/// Appends a restore marker; the delta may be empty.
pub fn record_restore(
    chain: &ProvenanceChain,
    delta: Delta,
    agent: &NamedNode,
    source: Option<&NamedNode>,
    target: u64,
    now: Timestamp,
) -> Result<ProvenanceChain, ProvError> {
    if target == 0 || target >= chain.len() {
        return Err(ProvError::OutOfRange(target, chain.len().saturating_sub(1)));
    }
    let draft = Draft {
        delta,
        agent,
        source,
        description: format!("restored to snapshot {target}"),
        terminal: false,
    };
    chain.append(draft, now)
}

/// Appends the self-invalidated terminal snapshot; `delta` removes every
/// remaining quad of the entity.
pub fn record_deletion(
    chain: &ProvenanceChain,
    delta: Delta,
    agent: &NamedNode,
    source: Option<&NamedNode>,
    description: &str,
    now: Timestamp,
) -> Result<ProvenanceChain, ProvError> {
    if chain.is_empty() {
        return Err(ProvError::Empty(chain.entity.clone()));
    }
    if chain.is_deleted() {
        return Err(ProvError::Deleted(chain.entity.clone()));
    }
    let draft = Draft {
        delta,
        agent,
        source,
        description: description.to_owned(),
        terminal: true,
    };
    chain.append(draft, now)
}
