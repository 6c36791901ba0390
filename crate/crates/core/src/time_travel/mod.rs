//! Historical states by reverse-applying deltas, restores, and the catalog
//! of deleted entities.

use std::collections::BTreeSet;

use crate::delta::Delta;
use crate::provenance::{self, record_restore, ProvError, ProvenanceChain, Snapshot, Timestamp};
use crate::rdf::vocab::prov;
use crate::rdf::{NamedNode, QuadSet, Subject, Term};
use crate::sparql::{self, SparqlError, StoreHandle};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TimeTravelError {
    #[error("snapshot {k} out of range 1..={n}")]
    OutOfRange { k: u64, n: u64 },
    #[error("integrity error on {entity} at snapshot {k}: backward and forward replay disagree on {differing} quads")]
    Integrity { entity: NamedNode, k: u64, differing: usize },
    #[error(transparent)]
    Prov(#[from] ProvError),
    #[error(transparent)]
    Store(#[from] SparqlError),
}

/// An entity's state as of one snapshot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VersionView {
    pub entity: NamedNode,
    pub at_snapshot: u64,
    pub quads: QuadSet,
    pub snapshot_meta: Snapshot,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VaultEntry {
    pub entity: NamedNode,
    pub deleted_at: Timestamp,
    pub agent: NamedNode,
    pub last_live_view: VersionView,
}

/// State after snapshot `k`, replayed backward from `current` and checked
/// against forward replay from the empty graph.
pub fn materialize(chain: &ProvenanceChain, current: &QuadSet, k: u64) -> Result<VersionView, TimeTravelError> {
    let n = chain.len();
    if k == 0 || k > n {
        return Err(TimeTravelError::OutOfRange { k, n });
    }
    let mut backward = current.clone();
    for s in chain.snapshots[k as usize..].iter().rev() {
        s.delta.invert().apply_in_place(&mut backward);
    }
    let mut forward = QuadSet::new();
    for s in &chain.snapshots[..k as usize] {
        s.delta.apply_in_place(&mut forward);
    }
    if backward != forward {
        return Err(TimeTravelError::Integrity {
            entity: chain.entity.clone(),
            k,
            differing: backward.symmetric_difference(&forward).count(),
        });
    }
    Ok(VersionView {
        entity: chain.entity.clone(),
        at_snapshot: k,
        quads: backward,
        snapshot_meta: chain.snapshots[k as usize - 1].clone(),
    })
}

/// Replaces the entity state with snapshot `k`'s state and appends a restore
/// snapshot recording the difference.
pub fn restore(
    chain: &ProvenanceChain,
    current: &QuadSet,
    k: u64,
    agent: &NamedNode,
    now: Timestamp,
) -> Result<(QuadSet, ProvenanceChain), TimeTravelError> {
    let n = chain.len();
    if k == 0 || k >= n {
        return Err(TimeTravelError::OutOfRange { k, n: n.saturating_sub(1) });
    }
    let target = materialize(chain, current, k)?.quads;
    let delta = Delta::between(current, &target).map_err(|e| ProvError::Invariant(e.to_string()))?;
    let chain = record_restore(chain, delta, agent, None, k, now)?;
    Ok((target, chain))
}

/// Reads an entity's chain from its provenance graph.
pub fn load_chain(prov: &StoreHandle, entity: &NamedNode) -> Result<ProvenanceChain, TimeTravelError> {
    let quads = sparql::graph_quads(prov, &provenance::prov_graph(entity))?;
    Ok(provenance::from_prov_quads(&quads, entity)?)
}

/// Linked entities whose live state differs from their state at `at_time`,
/// with the sequence to revert them to (0: created later, delete). An
/// imported entity is never deleted this way; its import snapshot stands in
/// for everything before it.
///
/// Candidates are the IRIs in subject or object position of either the
/// restored or the current quads, excluding `entity` itself.
pub fn cascade_targets(
    entity: &NamedNode,
    restored_quads: &QuadSet,
    current_quads: &QuadSet,
    data: &StoreHandle,
    prov: &StoreHandle,
    at_time: &Timestamp,
) -> Result<Vec<(NamedNode, u64)>, TimeTravelError> {
    let mut out = Vec::new();
    for candidate in linked_iris(restored_quads.iter().chain(current_quads)) {
        if candidate == *entity {
            continue;
        }
        let chain = load_chain(prov, &candidate)?;
        if chain.is_empty() {
            continue;
        }
        let live = if chain.is_deleted() {
            QuadSet::new()
        } else {
            sparql::describe(data, &candidate)?
        };
        // Imported data existed before its first snapshot was taken.
        let k = match chain.sequence_at(at_time) {
            0 if chain.snapshots[0].is_import() => 1,
            k => k,
        };
        let then = match k {
            0 => QuadSet::new(),
            k => materialize(&chain, &live, k)?.quads,
        };
        if then != live {
            out.push((candidate, k));
        }
    }
    Ok(out)
}

fn linked_iris<'a>(quads: impl Iterator<Item = &'a crate::rdf::Quad>) -> BTreeSet<NamedNode> {
    let mut out = BTreeSet::new();
    for q in quads {
        if let Subject::NamedNode(s) = &q.subject {
            out.insert(s.clone());
        }
        if let Term::NamedNode(o) = &q.object {
            out.insert(o.clone());
        }
    }
    out
}

/// Every deleted entity, most recently deleted first.
pub fn list_vault(prov: &StoreHandle) -> Result<Vec<VaultEntry>, TimeTravelError> {
    let query = format!(
        "SELECT DISTINCT ?e WHERE {{ GRAPH ?g {{ ?s <{}> ?e ; <{}> ?t ; <{}> ?t }} }}",
        prov::SPECIALIZATION_OF,
        prov::GENERATED_AT_TIME,
        prov::INVALIDATED_AT_TIME
    );
    let mut out = Vec::new();
    for e in prov.select(&query)?.column("e") {
        let Some(entity) = e.as_named_node() else { continue };
        let chain = load_chain(prov, entity)?;
        if !chain.is_deleted() || chain.len() < 2 {
            continue;
        }
        let head = chain.head().expect("deleted chains are nonempty");
        out.push(VaultEntry {
            entity: entity.clone(),
            deleted_at: head.generated_at,
            agent: head.agent.clone(),
            last_live_view: materialize(&chain, &QuadSet::new(), chain.len() - 1)?,
        });
    }
    out.sort_by(|a, b| b.deleted_at.cmp(&a.deleted_at).then_with(|| a.entity.cmp(&b.entity)));
    Ok(out)
}
